"""Differentially private trace-variant queries over event logs."""

from .baseline import anonymize_laplace
from .estimators import LaplaceTreeAnonymizer, SaCoFa, VariantQuery
from .evaluation import UtilityReport, compare, make_synthetic_log
from .event_log import (
    EventLog,
    Trace,
    Variant,
    VariantDistribution,
    load_csv,
    load_log,
    load_variants,
    prefix_count,
    variant_query,
    write_variants,
)
from .rules import RelationKind, RuleSet, ScoreFunction, assess_prefix, derive_rules, score
from .sacofa import (
    AnonymizationConfig,
    PrefixNode,
    RunReport,
    SemanticPruning,
    UniformPruning,
    anonymize,
    assemble_result,
    prune,
)

__version__ = "0.1.0"

__all__ = [
    "AnonymizationConfig",
    "EventLog",
    "LaplaceTreeAnonymizer",
    "PrefixNode",
    "RelationKind",
    "RuleSet",
    "RunReport",
    "SaCoFa",
    "ScoreFunction",
    "SemanticPruning",
    "Trace",
    "UniformPruning",
    "UtilityReport",
    "Variant",
    "VariantDistribution",
    "VariantQuery",
    "anonymize",
    "anonymize_laplace",
    "assemble_result",
    "assess_prefix",
    "compare",
    "derive_rules",
    "load_csv",
    "load_log",
    "load_variants",
    "make_synthetic_log",
    "prefix_count",
    "prune",
    "score",
    "variant_query",
    "write_variants",
]
