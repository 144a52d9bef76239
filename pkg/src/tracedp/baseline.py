"""Laplacian prefix-tree baseline.

Same tree skeleton, noisy counts, pruning and result assembly as the
semantics-aware variant, but every candidate is counted and no candidate is
scored.
"""

from __future__ import annotations

from typing import Iterable

from . import dp_mech
from .event_log import EmptyLogError, EventLog, VariantDistribution
from .sacofa import RunReport, UniformPruning, _finish, check_k, grow_tree


def anonymize_laplace(
    log: EventLog,
    epsilon: float,
    k: int,
    p: int = 1,
    seed: int | None = None,
    activities: Iterable[str] | None = None,
) -> tuple[VariantDistribution, RunReport]:
    """Anonymize ``log`` with Laplace counts on an unscored prefix tree.

    ``activities`` overrides the candidate alphabet, which defaults to the
    activities of ``log``.
    """
    if not log.traces:
        raise EmptyLogError("cannot anonymize an empty log")
    epsilon = dp_mech.check_positive(epsilon, "epsilon")
    k = check_k(k)
    rng = dp_mech.RandomSource(seed)
    report = RunReport("laplace", rng.seed, epsilon, k)
    tree = grow_tree(log, epsilon, k, UniformPruning(p), rng, report, activities=activities)
    return _finish(tree, k, report), report
