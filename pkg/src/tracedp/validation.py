"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence

from .dp_mech import U64_MAX, check_positive
from .event_log import EmptyLogError, EventLog, VariantDistribution
from .sacofa import SemanticPruning, UniformPruning, check_k

__all__ = ["check_log", "check_epsilon", "check_k", "check_pruning", "check_seed"]


def check_log(X) -> EventLog:
    """Coerce ``X`` to a nonempty :class:`EventLog`.

    Accepts an ``EventLog``, a ``VariantDistribution`` of terminated variants,
    or a sequence of activity sequences.
    """
    if isinstance(X, EventLog):
        log = X
    elif isinstance(X, VariantDistribution):
        log = EventLog.from_distribution(X)
    elif isinstance(X, Iterable) and not isinstance(X, (str, bytes)):
        seqs = []
        for item in X:
            if isinstance(item, (str, bytes)) or not isinstance(item, Sequence):
                raise TypeError(f"expected a sequence of activity labels, got {item!r}")
            seqs.append(tuple(item))
        log = EventLog.from_sequences(seqs)
    else:
        raise TypeError(f"cannot interpret {type(X).__name__} as an event log")
    if not log.traces:
        raise EmptyLogError("event log is empty")
    return log


def check_epsilon(epsilon) -> float:
    return check_positive(epsilon, "epsilon")


def check_seed(seed) -> int | None:
    if seed is None:
        return None
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed <= U64_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def check_pruning(p=None, p_harmless=None, p_harmful=None):
    """Resolve the pruning flags into a strategy.

    ``p`` selects uniform pruning and excludes the per-class thresholds. A
    missing ``p_harmless`` defaults to 1 and a missing ``p_harmful`` to
    infinity. With nothing set, uniform pruning at 1 is used.
    """
    if p is not None and (p_harmless is not None or p_harmful is not None):
        raise ValueError("p is mutually exclusive with p_harmless/p_harmful")
    if p_harmless is None and p_harmful is None:
        return UniformPruning(1 if p is None else p)
    return SemanticPruning(
        1 if p_harmless is None else p_harmless,
        math.inf if p_harmful is None else p_harmful,
    )
