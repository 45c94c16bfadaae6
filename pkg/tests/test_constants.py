import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from entropy_stability.constants import (
    ZERO_REGIME_RECOMPUTED,
    K,
    RegimeError,
    SingularityError,
    bound_for,
    c_n,
    check_logarithmic,
    check_multiplicative,
    d_n,
)
from entropy_stability.core import AlphaCase, UsageError


def k_exact(alpha: int) -> Fraction:
    # rational evaluation for integer alpha >= 2, independent of floats
    d1 = abs(Fraction(2) ** (1 - alpha) - 1)
    d2 = abs(Fraction(2) ** (-alpha) - 1)
    return (3 + 12 * Fraction(2) ** alpha + 32 * Fraction(3) ** (alpha + 1) / d2) / d1


def test_k_of_two():
    assert k_exact(2) == 2406
    assert K(2.0) == 2406.0


@pytest.mark.parametrize("alpha", [2, 3, 4, 5])
def test_k_matches_rational_oracle(alpha):
    assert K(alpha) == pytest.approx(float(k_exact(alpha)), rel=1e-12)


def test_k_of_three():
    assert k_exact(3) == Fraction(4, 3) * (3 + 96 + Fraction(20736, 7))


def test_c_d_for_alpha_two():
    assert c_n(2.0, 1) == 67370.0
    assert d_n(2.0, 1) == 269476.0
    assert c_n(2.0, 4) == 1077890.0


def test_growth_in_n():
    c = [c_n(2.0, n) for n in range(1, 101)]
    d = [d_n(2.0, n) for n in range(1, 101)]
    assert all(b > a for a, b in zip(c, c[1:]))
    assert all(b > a for a, b in zip(d, d[1:]))
    assert c[3] > 1e6 and d[3] > 1e6


@given(st.floats(0.05, 6).filter(lambda a: abs(a - 1) > 1e-3), st.integers(1, 50))
def test_k_positive_and_c_d_monotone(alpha, n):
    assert K(alpha) > 0
    assert c_n(alpha, n + 1) > c_n(alpha, n)
    assert d_n(alpha, n + 1) > d_n(alpha, n)


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_singular(alpha):
    with pytest.raises(SingularityError):
        K(alpha)


def test_negative_alpha_rejected():
    with pytest.raises(RegimeError):
        K(-1.0)


def test_near_one_blows_up():
    assert K(1.0 + 1e-9) > 1e9


@pytest.mark.parametrize("n", [0, -1, 1.5, True])
def test_bad_n(n):
    with pytest.raises(UsageError):
        c_n(2.0, n)


class TestBoundFor:
    def test_negative(self):
        b = bound_for(AlphaCase.from_alpha(-1.0))
        assert (b.coef_eps1, b.coef_eps2) == (2.0, 3.0)
        assert b.value(0.1, 0.2) == pytest.approx(0.8)

    def test_zero(self):
        b = bound_for(AlphaCase.from_alpha(0.0))
        assert (b.coef_eps1, b.coef_eps2) == (191.0, 1263.0)
        assert ZERO_REGIME_RECOMPUTED[1] < b.coef_eps2

    def test_zero_recomputed_from_parts(self):
        # published 191 e1 + 1263 e2 carries 127 e1 + 1010 e2 from the
        # intermediate bound; swapping in 506 e2 leaves the rest unchanged
        inter = (1 + 2 * 63, 2 + 2 * 63 * 4)
        assert inter == (127, 506)
        e1, e2 = 191, 1263 - 1010 + inter[1]
        assert (e1, e2) == ZERO_REGIME_RECOMPUTED

    def test_positive(self):
        b = bound_for(AlphaCase.from_alpha(2.0), 1)
        assert (b.coef_eps1, b.coef_eps2) == (67370.0, 269476.0)
        assert "c1" in b.label

    def test_positive_needs_n(self):
        with pytest.raises(UsageError):
            bound_for(AlphaCase.from_alpha(2.0))

    def test_n_rejected_elsewhere(self):
        with pytest.raises(UsageError):
            bound_for(AlphaCase.from_alpha(-1.0), 3)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_monotone_in_eps(self, a, b, c, d):
        bound = bound_for(AlphaCase.from_alpha(-0.5))
        lo1, hi1 = sorted((a, b))
        lo2, hi2 = sorted((c, d))
        assert bound.value(lo1, lo2) <= bound.value(hi1, hi2)


class TestCheckers:
    pairs = [(0.5, 0.5), (0.25, 0.8), (0.9, 0.1)]

    def test_power_is_multiplicative(self):
        assert check_multiplicative(lambda t: t**1.7, self.pairs) < 1e-15

    def test_log_is_logarithmic(self):
        assert check_logarithmic(math.log, self.pairs) < 1e-15

    def test_offset_detected(self):
        assert check_multiplicative(lambda t: t + 1, [(0.5, 0.5)]) == pytest.approx(1.0)
        assert check_logarithmic(lambda t: 1.0, [(0.5, 0.5)]) == 1.0

    def test_empty(self):
        with pytest.raises(UsageError):
            check_multiplicative(lambda t: t, [])
