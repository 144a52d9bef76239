"""Seeded randomness, Laplace noise and exponential-mechanism selection."""

from __future__ import annotations

import math
import secrets
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    sensitivity: float = 1.0

    def __post_init__(self):
        check_positive(self.epsilon, "epsilon")
        check_positive(self.sensitivity, "sensitivity")

    @property
    def laplace_scale(self) -> float:
        return self.sensitivity / self.epsilon


def check_positive(value, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be a number, got {value!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


def new_seed() -> int:
    return secrets.randbits(64)


class RandomSource:
    """Deterministic uniform stream backed by PCG64.

    Uniforms are generated in blocks; the stream consumed one value at a
    time is identical regardless of block size.
    """

    _BLOCK = 1024

    def __init__(self, seed: int | None = None):
        if seed is None:
            seed = new_seed()
        seed = int(seed)
        if not 0 <= seed <= U64_MAX:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self._buf: list[float] = []
        self._pos = 0
        self.draws = 0

    @classmethod
    def spawn(cls, base_seed: int, index: int) -> "RandomSource":
        """Independent source for cell ``index`` of a grid seeded by ``base_seed``."""
        ss = np.random.SeedSequence([int(base_seed), int(index)])
        return cls(int(ss.generate_state(1, dtype=np.uint64)[0]))

    def uniform(self) -> float:
        """One draw from the open interval (0, 1)."""
        while True:
            if self._pos >= len(self._buf):
                self._buf = self._gen.random(self._BLOCK).tolist()
                self._pos = 0
            u = self._buf[self._pos]
            self._pos += 1
            self.draws += 1
            if u > 0.0:
                return u


def laplace_noise(rng: RandomSource, scale: float) -> float:
    """Inverse-CDF draw from Laplace(0, scale)."""
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale!r}")
    u = rng.uniform()
    if u < 0.5:
        return scale * math.log(2.0 * u)
    return -scale * math.log(2.0 * (1.0 - u))


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def noisy_value(rng: RandomSource, true_count: int, epsilon: float) -> float:
    """Unclamped, unrounded ``true_count + Lap(1/epsilon)``."""
    return true_count + laplace_noise(rng, 1.0 / epsilon)


def noisy_count(rng: RandomSource, true_count: int, epsilon: float) -> int:
    return max(0, round_half_away(noisy_value(rng, true_count, epsilon)))


def exp_probabilities(scores: Sequence[float], epsilon: float, delta_s: float) -> list[float]:
    """Selection probabilities ``exp(eps*s/(2*delta_s))``, normalized.

    The maximum score is subtracted before exponentiating.
    """
    if not scores:
        raise ValueError("exponential mechanism needs at least one outcome")
    factor = epsilon / (2.0 * delta_s)
    top = max(scores)
    weights = [math.exp(factor * (s - top)) for s in scores]
    total = math.fsum(weights)
    return [w / total for w in weights]


def exp_select(
    rng: RandomSource,
    outcomes: Sequence[tuple[Hashable, float]],
    epsilon: float,
    delta_s: float,
):
    """Pick one label from ``(label, score)`` pairs via the exponential mechanism."""
    if not outcomes:
        raise ValueError("exponential mechanism needs at least one outcome")
    for _, s in outcomes:
        if not math.isfinite(s):
            raise ValueError(f"score must be finite, got {s!r}")
    probs = exp_probabilities([s for _, s in outcomes], epsilon, delta_s)
    u = rng.uniform()
    acc = 0.0
    for (label, _), p in zip(outcomes, probs):
        acc += p
        if u < acc:
            return label
    return outcomes[-1][0]


def include_harmful(
    rng: RandomSource,
    score_value: float,
    score_max: float,
    epsilon: float,
    delta_s: float,
) -> bool:
    """Two-outcome exponential choice between keeping and dropping a candidate.

    Dropping is always scored at the maximum, so the lower a candidate's
    score, the less likely it is kept.
    """
    choice = exp_select(rng, (("include", score_value), ("exclude", score_max)), epsilon, delta_s)
    return choice == "include"
