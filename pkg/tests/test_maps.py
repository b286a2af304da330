import math
import random

import pytest

from hybridchaos import BaseMap, NonFiniteError, eval_base_map, mod1


def test_mod1_examples():
    assert mod1(1.7) == pytest.approx(0.7, abs=1e-15)
    assert mod1(-0.3) == pytest.approx(0.7, abs=1e-15)
    assert mod1(0.0) == 0.0


def test_mod1_range():
    rng = random.Random(1)
    for _ in range(10000):
        v = (rng.random() - 0.5) * 1e6
        f = mod1(v)
        assert 0.0 <= f < 1.0


def test_mod1_near_integer_rounds_into_range():
    # v - floor(v) rounds up to 1.0 here without the guard
    assert 0.0 <= mod1(-1e-18) < 1.0
    assert mod1(2.0) == 0.0


def test_mod1_idempotent():
    rng = random.Random(2)
    for _ in range(1000):
        v = (rng.random() - 0.5) * 100
        f = mod1(v)
        assert mod1(f) == f


def test_mod1_periodicity():
    # Dyadic fractions keep v + k exact, isolating mod1 itself from
    # float addition error (ulp(1e6) ~ 1e-10 would otherwise dominate).
    rng = random.Random(3)
    for _ in range(2000):
        v = rng.randrange(1 << 26) / (1 << 26)
        k = rng.randint(-10**6, 10**6)
        assert abs(mod1(v + k) - mod1(v)) <= 1e-12
    # Non-dyadic spot checks at small shifts stay at ulp scale.
    for v in (0.7, 0.123456, 0.999999):
        for k in (-3, -1, 1, 5):
            assert abs(mod1(v + k) - mod1(v)) <= 1e-12


def test_mod1_shift_by_one():
    rng = random.Random(4)
    for _ in range(1000):
        v = rng.random() * 4 - 2
        assert abs(mod1(v + 1) - mod1(v)) <= 1e-12


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_mod1_nonfinite(bad):
    with pytest.raises(NonFiniteError):
        mod1(bad)


def test_base_map_examples():
    assert eval_base_map(BaseMap.LOGISTIC, 1.0, 0.5) == 1.0
    assert eval_base_map(BaseMap.TENT, 0.9, 0.75) == 0.45
    assert eval_base_map(BaseMap.SIN, 0.5, 1 / 6) == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("base", list(BaseMap))
def test_base_map_symmetry(base):
    rng = random.Random(5)
    for _ in range(500):
        r = 0.05 + rng.random() * 0.95
        x = rng.randrange(1 << 20) / (1 << 20)  # dyadic: 1 - x is exact
        assert eval_base_map(base, r, x) == pytest.approx(
            eval_base_map(base, r, 1.0 - x), abs=1e-12
        )


@pytest.mark.parametrize("base", list(BaseMap))
def test_base_map_peaks_at_r(base):
    rng = random.Random(6)
    for r in (0.1, 0.25, 0.5, 0.9, 1.0):
        assert eval_base_map(base, r, 0.5) == pytest.approx(r, abs=1e-15)
        hi = max(
            eval_base_map(base, r, x)
            for x in [k / 999 for k in range(1000)] + [rng.random() for _ in range(200)]
        )
        assert hi <= r * (1 + 1e-15)
        assert eval_base_map(base, r, 0.0) == 0.0
