"""Monte Carlo check of the differential-privacy ratio bound on neighbouring logs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

from .baseline import anonymize_laplace
from .dp_mech import RandomSource
from .event_log import EventLog, Trace, Variant, VariantDistribution
from .rules import derive_rules
from .sacofa import AnonymizationConfig, UniformPruning, anonymize

# Micro instance: two activities, every variant of length <= 2 except <b,b>.
MICRO_VARIANTS = {
    ("a",): 3,
    ("b",): 2,
    ("a", "b"): 4,
    ("b", "a"): 3,
    ("a", "a"): 2,
}
MICRO_EXTRA_TRACE = ("a", "b")


def micro_logs() -> tuple[EventLog, EventLog]:
    """The default neighbouring pair ``(L, L + {t})``."""
    seqs = [acts for acts, c in MICRO_VARIANTS.items() for _ in range(c)]
    small = EventLog.from_sequences(seqs)
    big = EventLog(small.traces + (Trace("extra", MICRO_EXTRA_TRACE),))
    return small, big


def output_events(activities, k: int) -> list[Variant]:
    """Every variant an anonymizer with length bound ``k`` could emit."""
    acts = sorted(activities)
    events = []
    for n in range(0, k + 1):
        for seq in itertools.product(acts, repeat=n):
            events.append(Variant(seq, True))
    for seq in itertools.product(acts, repeat=k):
        events.append(Variant(seq, False))
    return events


@dataclass
class EventCheck:
    variant: Variant
    freq_small: float
    freq_big: float
    slack: float
    passed: bool

    @property
    def ratio(self) -> float:
        lo, hi = sorted((self.freq_small, self.freq_big))
        return math.inf if lo == 0 else hi / lo


@dataclass
class DPCheckResult:
    epsilon: float
    runs: int
    events: list[EventCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.events)

    def lines(self) -> list[str]:
        out = []
        for e in self.events:
            status = "PASS" if e.passed else "FAIL"
            out.append(
                f"{status}\t{e.variant}\tP(L)={e.freq_small:.4f}\tP(L')={e.freq_big:.4f}"
                f"\tratio={e.ratio:.3f}\tbound={math.exp(self.epsilon):.3f}"
            )
        return out


def _bound_holds(f1, f2, n, eps) -> tuple[bool, float]:
    # f1 <= e^eps * f2 within three standard errors of the difference.
    var = f1 * (1 - f1) / n + math.exp(2 * eps) * f2 * (1 - f2) / n
    slack = 3 * math.sqrt(var)
    return f1 <= math.exp(eps) * f2 + slack, slack


def make_runner(mechanism: str, log: EventLog, epsilon: float, k: int, p: int) -> Callable:
    if mechanism == "laplace":
        return lambda seed: anonymize_laplace(log, epsilon, k, p, seed)[0]
    if mechanism == "sacofa":
        rules = derive_rules(log)

        def run(seed):
            cfg = AnonymizationConfig(epsilon, k, UniformPruning(p), seed=seed)
            return anonymize(log, cfg, rules=rules)[0]

        return run
    raise ValueError(f"unknown mechanism {mechanism!r}")


def presence_frequencies(run: Callable[[int], VariantDistribution], runs: int, base_seed: int, offset: int = 0):
    hits: dict[Variant, int] = {}
    for i in range(runs):
        seed = RandomSource.spawn(base_seed, offset + i).seed
        for v in run(seed):
            hits[v] = hits.get(v, 0) + 1
    return hits


def dp_smoke_test(
    small: EventLog,
    big: EventLog,
    mechanism: str = "sacofa",
    epsilon: float = 1.0,
    k: int = 2,
    p: int = 1,
    runs: int = 100_000,
    seed: int = 0,
) -> DPCheckResult:
    """Estimate presence probabilities of every possible output variant on
    both logs and test the ``e^epsilon`` ratio bound in both directions.
    """
    hits_small = presence_frequencies(make_runner(mechanism, small, epsilon, k, p), runs, seed, 0)
    hits_big = presence_frequencies(make_runner(mechanism, big, epsilon, k, p), runs, seed, runs)
    result = DPCheckResult(epsilon, runs)
    for v in output_events(small.activity_universe | big.activity_universe, k):
        f1 = hits_small.get(v, 0) / runs
        f2 = hits_big.get(v, 0) / runs
        ok1, s1 = _bound_holds(f1, f2, runs, epsilon)
        ok2, s2 = _bound_holds(f2, f1, runs, epsilon)
        result.events.append(EventCheck(v, f1, f2, max(s1, s2), ok1 and ok2))
    return result
