"""Semantics-aware prefix-tree anonymization of trace-variant distributions.

The tree grows one activity per level. Candidates that violate a behavioural
rule of the input log enter the tree only if an exponential-mechanism draw
accepts them; every node in the tree carries a clamped Laplace count and is
pruned against a per-class threshold.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Union

from . import dp_mech
from .event_log import EmptyLogError, EventLog, Variant, VariantDistribution
from .rules import RuleSet, ScoreFunction, assess_prefix, derive_rules

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UniformPruning:
    p: int = 1

    def __post_init__(self):
        _check_threshold(self.p, "p")

    def threshold(self, harmful: bool) -> float:
        return self.p


@dataclass(frozen=True)
class SemanticPruning:
    """Separate thresholds for harmless and harmful nodes.

    ``p_harmful`` may be ``math.inf`` to drop every harmful node.
    """

    p_harmless: float = 1
    p_harmful: float = math.inf

    def __post_init__(self):
        _check_threshold(self.p_harmless, "p_harmless")
        _check_threshold(self.p_harmful, "p_harmful")
        if self.p_harmless > self.p_harmful:
            raise ValueError(
                f"p_harmless ({self.p_harmless}) must not exceed p_harmful ({self.p_harmful})"
            )

    def threshold(self, harmful: bool) -> float:
        return self.p_harmful if harmful else self.p_harmless


PruningStrategy = Union[UniformPruning, SemanticPruning]


def _check_threshold(value, name):
    if value == math.inf:
        return
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValueError(f"{name} must be an integer >= 1 or inf, got {value!r}")


def check_k(k) -> int:
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    return int(k)


@dataclass(frozen=True)
class AnonymizationConfig:
    epsilon: float
    k: int
    pruning: PruningStrategy = field(default_factory=UniformPruning)
    score_fn: ScoreFunction = field(default_factory=ScoreFunction)
    seed: int | None = None

    def __post_init__(self):
        dp_mech.check_positive(self.epsilon, "epsilon")
        check_k(self.k)
        if not isinstance(self.pruning, (UniformPruning, SemanticPruning)):
            raise TypeError(f"unsupported pruning strategy {self.pruning!r}")


@dataclass
class PrefixNode:
    prefix: Variant
    noisy_count: int
    harmful: bool = False

    @property
    def depth(self) -> int:
        return len(self.prefix.activities)


@dataclass
class RunReport:
    """Mechanism invocation counts and pruning diagnostics for one run."""

    mechanism: str
    seed: int
    epsilon: float
    k: int
    laplace_draws: int = 0
    exp_selections: int = 0
    harmful_candidates: int = 0
    harmful_included: int = 0
    pruned_harmless: int = 0
    pruned_harmful: int = 0
    candidates_per_depth: list[int] = field(default_factory=list)
    retained_per_depth: list[int] = field(default_factory=list)
    emitted_variants: int = 0
    emitted_count: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def mechanism_invocations(self) -> int:
        return self.laplace_draws + self.exp_selections

    def to_text(self) -> str:
        rows = [
            ("mechanism", self.mechanism),
            ("seed", self.seed),
            ("epsilon", repr(self.epsilon)),
            ("k", self.k),
            ("laplace_draws", self.laplace_draws),
            ("exp_selections", self.exp_selections),
            ("mechanism_invocations", self.mechanism_invocations),
            ("harmful_candidates", self.harmful_candidates),
            ("harmful_included", self.harmful_included),
            ("pruned_harmless", self.pruned_harmless),
            ("pruned_harmful", self.pruned_harmful),
            ("candidates_per_depth", ",".join(map(str, self.candidates_per_depth))),
            ("retained_per_depth", ",".join(map(str, self.retained_per_depth))),
            ("emitted_variants", self.emitted_variants),
            ("emitted_count", self.emitted_count),
            ("warnings", " | ".join(self.warnings)),
        ]
        return "".join(f"{k}={v}\n" for k, v in rows)


class PrefixCounter:
    """Exact prefix and full-variant counts of a log, indexed by activity tuple."""

    def __init__(self, log: EventLog):
        self.exact, self.prefixes = log.prefix_index

    def __call__(self, prefix: Variant) -> int:
        table = self.exact if prefix.terminated else self.prefixes
        return table.get(prefix.activities, 0)


@dataclass
class _Semantics:
    rules: RuleSet
    score_fn: ScoreFunction


def prune(tree: Iterable[PrefixNode], strategy: PruningStrategy) -> list[PrefixNode]:
    """Nodes whose noisy count reaches their class threshold.

    A count equal to the threshold is kept.
    """
    return [n for n in tree if n.noisy_count >= strategy.threshold(n.harmful)]


def assemble_result(tree: Iterable[PrefixNode], k: int) -> VariantDistribution:
    """Distribution over terminated nodes and unterminated nodes of depth ``k``.

    A depth-``k`` node reports the part of its count not already claimed by
    its own terminated child, i.e. the traces that run past the length bound.
    """
    nodes = list(tree)
    terminated = {n.prefix.activities: n.noisy_count for n in nodes if n.prefix.terminated}
    entries = {}
    for n in nodes:
        if n.prefix.terminated:
            entries[n.prefix] = n.noisy_count
        elif n.depth == k:
            rest = n.noisy_count - terminated.get(n.prefix.activities, 0)
            if rest > 0:
                entries[n.prefix] = rest
    return VariantDistribution(entries)


def _candidates(frontier: list[PrefixNode], activities: list[str], with_activities: bool):
    for parent in frontier:
        if with_activities:
            for a in activities:
                yield parent.prefix.extend(a)
        yield parent.prefix.terminate()


def grow_tree(
    log: EventLog,
    epsilon: float,
    k: int,
    pruning: PruningStrategy,
    rng: dp_mech.RandomSource,
    report: RunReport,
    semantics: _Semantics | None = None,
    counter: PrefixCounter | None = None,
    activities: Iterable[str] | None = None,
) -> list[PrefixNode]:
    """Build the pruned prefix tree.

    Without ``semantics`` every candidate is counted (the Laplace baseline).
    Levels ``1..k`` append an activity or the end symbol to each open node of
    the previous level; a final pass only offers the end symbol to open nodes
    of depth ``k`` so that variants of length exactly ``k`` can terminate.
    """
    if not log.traces:
        raise EmptyLogError("cannot anonymize an empty log")
    counter = counter or PrefixCounter(log)
    acts = sorted(activities if activities is not None else log.activity_universe)
    root = PrefixNode(Variant((), False), len(log.traces))
    frontier = [root]
    tree: list[PrefixNode] = []
    if semantics is not None:
        delta_s = semantics.score_fn.sensitivity

    for n in range(1, k + 2):
        if not frontier:
            break
        candidates = list(_candidates(frontier, acts, with_activities=n <= k))
        report.candidates_per_depth.append(len(candidates))

        selected: list[tuple[Variant, bool]] = []
        if semantics is None:
            selected = [(c, False) for c in candidates]
        else:
            for c in candidates:
                violations = assess_prefix(semantics.rules, c).violation_count
                if violations == 0:
                    selected.append((c, False))
                    continue
                report.harmful_candidates += 1
                report.exp_selections += 1
                value = semantics.score_fn.from_violations(violations)
                if dp_mech.include_harmful(rng, value, delta_s, epsilon, delta_s):
                    report.harmful_included += 1
                    selected.append((c, True))

        level = []
        for c, harmful in selected:
            count = dp_mech.noisy_count(rng, counter(c), epsilon)
            report.laplace_draws += 1
            level.append(PrefixNode(c, count, harmful))

        kept = prune(level, pruning)
        dropped_harmful = sum(1 for node in level if node.harmful) - sum(1 for node in kept if node.harmful)
        report.pruned_harmful += dropped_harmful
        report.pruned_harmless += len(level) - len(kept) - dropped_harmful
        report.retained_per_depth.append(len(kept))
        tree.extend(kept)
        frontier = [node for node in kept if not node.prefix.terminated]
    return tree


def _finish(tree: list[PrefixNode], k: int, report: RunReport) -> VariantDistribution:
    result = assemble_result(tree, k)
    report.emitted_variants = len(result)
    report.emitted_count = result.total()
    if not result:
        msg = "anonymized distribution is empty after pruning"
        report.warnings.append(msg)
        logger.warning(msg)
    return result


def anonymize(
    log: EventLog,
    config: AnonymizationConfig,
    rules: RuleSet | None = None,
) -> tuple[VariantDistribution, RunReport]:
    """Anonymize the trace-variant distribution of ``log``.

    Parameters
    ----------
    log : EventLog
        Input log; must be nonempty.
    config : AnonymizationConfig
        Privacy parameter, length bound, pruning and score function. A
        missing seed is drawn from OS entropy and recorded in the report.
    rules : RuleSet, optional
        Precomputed rules of ``log``. Derived from ``log`` when omitted.

    Returns
    -------
    (VariantDistribution, RunReport)
    """
    if not log.traces:
        raise EmptyLogError("cannot anonymize an empty log")
    rng = dp_mech.RandomSource(config.seed)
    if rules is None:
        rules = derive_rules(log)
    report = RunReport("sacofa", rng.seed, float(config.epsilon), int(config.k))
    tree = grow_tree(
        log,
        float(config.epsilon),
        int(config.k),
        config.pruning,
        rng,
        report,
        semantics=_Semantics(rules, config.score_fn),
        activities=rules.universe,
    )
    return _finish(tree, int(config.k), report), report
