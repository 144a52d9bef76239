import math
import statistics

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tracedp.dp_mech import (
    PrivacyParams,
    RandomSource,
    exp_probabilities,
    exp_select,
    include_harmful,
    laplace_noise,
    noisy_count,
    noisy_value,
    round_half_away,
)


@pytest.mark.parametrize("b", [0.5, 1.0, 10.0])
def test_laplace_moments(b):
    rng = RandomSource(1234)
    x = np.array([laplace_noise(rng, b) for _ in range(100_000)])
    assert abs(x.mean()) <= 0.02 * b
    assert x.var() == pytest.approx(2 * b * b, rel=0.05)


def test_laplace_matches_cdf():
    # P(X <= t) = 1 - exp(-t/b)/2 for t >= 0
    rng = RandomSource(5)
    b = 2.0
    x = np.array([laplace_noise(rng, b) for _ in range(50_000)])
    for t in (0.5, 2.0, 5.0):
        assert np.mean(x <= t) == pytest.approx(1 - 0.5 * math.exp(-t / b), abs=0.01)
        assert np.mean(x <= -t) == pytest.approx(0.5 * math.exp(-t / b), abs=0.01)


def test_seeded_streams_repeat():
    a, b = RandomSource(42), RandomSource(42)
    assert [laplace_noise(a, 1.0) for _ in range(3000)] == [laplace_noise(b, 1.0) for _ in range(3000)]
    assert RandomSource(42).uniform() != RandomSource(43).uniform()


def test_spawned_sources_are_stable_and_distinct():
    assert RandomSource.spawn(7, 3).seed == RandomSource.spawn(7, 3).seed
    assert RandomSource.spawn(7, 3).seed != RandomSource.spawn(7, 4).seed


def test_seed_range():
    with pytest.raises(ValueError):
        RandomSource(-1)
    with pytest.raises(ValueError):
        RandomSource(2**64)
    assert 0 <= RandomSource().seed < 2**64


def test_laplace_rejects_bad_scale():
    with pytest.raises(ValueError):
        laplace_noise(RandomSource(0), 0.0)


@pytest.mark.parametrize("x,expected", [(0.5, 1), (-0.5, -1), (1.49, 1), (2.5, 3), (-2.5, -3), (0.0, 0)])
def test_round_half_away(x, expected):
    assert round_half_away(x) == expected


def test_noisy_count_clamps():
    class Fixed:
        def uniform(self):
            return 0.1  # Laplace(0, 1) draw of log(0.2) ~ -1.6

    assert noisy_count(Fixed(), 0, 1.0) == 0


def test_noisy_count_large_epsilon():
    rng = RandomSource(3)
    assert all(noisy_count(rng, 20, 1e6) == 20 for _ in range(1000))


def test_noisy_count_median():
    rng = RandomSource(11)
    draws = [noisy_count(rng, 10, 1.0) for _ in range(10_000)]
    assert abs(statistics.median(draws) - 10) <= 1
    assert min(draws) >= 0


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 2**32))
def test_noisy_value_shift(c1, c2, seed):
    v1 = noisy_value(RandomSource(seed), c1, 0.7)
    v2 = noisy_value(RandomSource(seed), c2, 0.7)
    assert v2 - v1 == pytest.approx(c2 - c1, abs=1e-9)


def test_exp_select_symmetry():
    rng = RandomSource(8)
    picks = [exp_select(rng, [("x", 1.0), ("y", 1.0)], 1.0, 1.0) for _ in range(10_000)]
    assert picks.count("x") / 10_000 == pytest.approx(0.5, abs=0.02)


def test_exp_select_ratio():
    rng = RandomSource(9)
    picks = [exp_select(rng, [("s1", 1.0), ("s2", 0.0)], 2.0, 1.0) for _ in range(100_000)]
    ratio = picks.count("s1") / picks.count("s2")
    assert ratio == pytest.approx(math.e, rel=0.10)


def test_exp_select_single_and_empty():
    rng = RandomSource(0)
    assert all(exp_select(rng, [("only", -5.0)], 1.0, 1.0) == "only" for _ in range(100))
    with pytest.raises(ValueError):
        exp_select(rng, [], 1.0, 1.0)
    with pytest.raises(ValueError):
        exp_select(rng, [("x", math.nan)], 1.0, 1.0)


def test_exp_probabilities_stable_for_huge_scores():
    probs = exp_probabilities([1e6, 1e6 - 1], 1e3, 1.0)
    assert math.isfinite(probs[0]) and probs[0] == pytest.approx(1.0)
    assert sum(probs) == pytest.approx(1.0)


def test_shift_invariance_same_stream():
    a, b = RandomSource(21), RandomSource(21)
    scores = [0.0, 1.0, 2.0]
    out_a = [exp_select(a, list(zip("xyz", scores)), 1.5, 1.0) for _ in range(5000)]
    out_b = [exp_select(b, [(l, s + 17.0) for l, s in zip("xyz", scores)], 1.5, 1.0) for _ in range(5000)]
    assert out_a == out_b


def test_shift_invariance_fractional():
    a, b = RandomSource(22), RandomSource(22)
    out_a = [exp_select(a, [("x", 0.3), ("y", 1.1)], 1.0, 1.0) for _ in range(20_000)]
    out_b = [exp_select(b, [("x", 0.3 + math.pi), ("y", 1.1 + math.pi)], 1.0, 1.0) for _ in range(20_000)]
    assert out_a.count("x") / 20_000 == pytest.approx(out_b.count("x") / 20_000, abs=0.005)


def test_include_harmful_equal_scores():
    rng = RandomSource(30)
    hits = sum(include_harmful(rng, 1, 1, 1.0, 1) for _ in range(10_000))
    assert hits / 10_000 == pytest.approx(0.5, abs=0.02)


def test_include_harmful_binary_closed_form():
    rng = RandomSource(31)
    hits = sum(include_harmful(rng, 0, 1, 1.0, 1) for _ in range(100_000))
    assert hits / 100_000 == pytest.approx(1 / (1 + math.exp(0.5)), abs=0.02)


def test_include_harmful_large_epsilon():
    rng = RandomSource(32)
    assert not any(include_harmful(rng, 0, 1, 1e6, 1) for _ in range(10_000))


def test_privacy_params():
    assert PrivacyParams(0.5, 1).laplace_scale == 2.0
    for bad in (0, -1, math.inf, math.nan):
        with pytest.raises(ValueError):
            PrivacyParams(bad)
