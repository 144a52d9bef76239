"""Utility and recognizable-noise metrics for anonymized distributions."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .event_log import EventLog, VariantDistribution, variant_query
from .rules import RuleSet, assess_prefix, derive_rules

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UtilityReport:
    variant_recall: float
    variant_precision: float
    l1_distance: float
    normal_fraction: float
    total_count_original: int
    total_count_anonymized: int

    def as_dict(self) -> dict:
        return asdict(self)

    def to_tsv(self) -> str:
        d = self.as_dict()
        return "\t".join(d) + "\n" + "\t".join(_fmt(v) for v in d.values()) + "\n"


def _fmt(v) -> str:
    return f"{v:.6f}" if isinstance(v, float) else str(v)


def l1_distance(a: VariantDistribution, b: VariantDistribution) -> float:
    """L1 distance of the count-normalized distributions (0 when both are empty)."""
    ta, tb = a.total(), b.total()
    if not ta and not tb:
        return 0.0
    if not ta or not tb:
        return 1.0
    return sum(abs(a.get(v, 0) / ta - b.get(v, 0) / tb) for v in set(a) | set(b))


def normal_fraction(rules: RuleSet, dist: VariantDistribution) -> float:
    """Count-weighted share of variants without any rule violation."""
    total = dist.total()
    if not total:
        return 0.0
    normal = sum(c for v, c in dist.items() if assess_prefix(rules, v).harmless)
    return normal / total


def compare(
    original: EventLog,
    anonymized: VariantDistribution,
    rules: RuleSet | None = None,
) -> UtilityReport:
    truth = variant_query(original)
    if rules is None:
        rules = derive_rules(original)
    shared = len(set(truth) & set(anonymized))
    if not anonymized:
        logger.warning("anonymized distribution is empty; precision reported as 0")
    return UtilityReport(
        variant_recall=shared / len(truth) if truth else 0.0,
        variant_precision=shared / len(anonymized) if anonymized else 0.0,
        l1_distance=l1_distance(truth, anonymized),
        normal_fraction=normal_fraction(rules, anonymized),
        total_count_original=truth.total(),
        total_count_anonymized=anonymized.total(),
    )


# Acyclic skeleton: each stage is a list of alternatives with weights; an
# alternative is a tuple of activities, possibly empty (optional stage).
SKELETON = (
    ((("Register",), 1.0),),
    ((("Check",), 0.6), (("Check", "Check"), 0.4)),
    ((("Fast",), 0.35), (("Standard",), 0.4), (("Standard", "Review"), 0.25)),
    (((), 0.55), (("Notify",), 0.45)),
    ((("Decide",), 1.0),),
    ((("Approve", "Pay"), 0.5), (("Reject",), 0.3), (("Reject", "Appeal"), 0.2)),
    (((), 0.6), (("Archive",), 0.4)),
    ((("Close",), 1.0),),
)


def make_synthetic_log(n_traces: int = 2000, seed: int = 0, skeleton=SKELETON) -> EventLog:
    """Semi-structured log sampled from an acyclic stage skeleton."""
    rng = np.random.default_rng(seed)
    seqs = []
    for _ in range(n_traces):
        acts: list[str] = []
        for stage in skeleton:
            weights = np.array([w for _, w in stage], dtype=float)
            pick = rng.choice(len(stage), p=weights / weights.sum())
            acts.extend(stage[pick][0])
        seqs.append(tuple(acts))
    return EventLog.from_sequences(seqs)
