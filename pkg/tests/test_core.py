import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entropy_stability.core import (
    AlphaCase,
    Box3,
    DomainError,
    EntropyFn,
    Interpolation,
    Regime,
    SimplexGrid,
    SolutionFamily,
    SumFunction,
    UsageError,
    eval_entropy_fn,
    from_callable,
    power_term,
    sup_over,
)

from conftest import const_family

positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)
exponents = st.floats(min_value=-3, max_value=3, allow_nan=False)


@pytest.mark.parametrize(
    "t, alpha, expected",
    [(2, 2, 4.0), (0, -1, 0.0), (0.25, -0.5, 2.0), (0, 0, 0.0), (7.5, 0, 1.0)],
)
def test_power_term(t, alpha, expected):
    assert power_term(t, alpha) == expected


@given(positive, positive, exponents)
def test_power_term_is_multiplicative(t, u, alpha):
    assert power_term(t, 0) == 1.0
    lhs = power_term(t, alpha) * power_term(u, alpha)
    assert lhs == pytest.approx(power_term(t * u, alpha), rel=1e-12)


def test_power_term_vectorised():
    out = power_term(np.array([0.0, 1.0, 4.0]), -0.5)
    np.testing.assert_array_equal(out, [0.0, 1.0, 0.5])


class TestAlphaCase:
    @pytest.mark.parametrize("alpha, regime", [(-2, Regime.NEGATIVE), (0, Regime.ZERO), (0.5, Regime.POSITIVE_NOT_ONE)])
    def test_regime(self, alpha, regime):
        assert AlphaCase.from_alpha(alpha).regime is regime

    def test_one_is_excluded(self):
        with pytest.raises(UsageError):
            AlphaCase.from_alpha(1.0)

    def test_inconsistent_regime(self):
        with pytest.raises(UsageError):
            AlphaCase(-1.0, Regime.ZERO)


class TestBox3:
    def test_default_lattice(self):
        box = Box3.default(4.0, 16)
        assert box.lo == 0.25 and box.step == 0.25
        np.testing.assert_array_equal(box.axis(), np.arange(1, 17) * 0.25)

    @pytest.mark.parametrize("lo, n, grid", [(0, 1, 4), (2, 1, 4), (0.1, 1, 1), (0.1, 1, 2.5)])
    def test_invalid(self, lo, n, grid):
        with pytest.raises(UsageError):
            Box3(lo, n, grid)

    @given(st.floats(0.01, 10), st.floats(0.01, 10), st.integers(2, 30))
    def test_axis_increasing_inside(self, lo, width, grid):
        box = Box3(lo, lo + width, grid)
        ax = box.axis()
        assert np.all(np.diff(ax) > 0)
        assert ax[0] == lo and ax[-1] == box.n
        assert box.points().shape == (grid**3, 3)


def test_simplex_grid_interior():
    g = SimplexGrid(8)
    pts = g.array()
    assert len(pts) == sum(range(1, 7))
    assert np.all(pts > 0) and np.all(pts.sum(axis=1) < 1)
    with pytest.raises(UsageError):
        SimplexGrid(2)


class TestSumFunction:
    def test_nearest_bucket(self):
        phi = SumFunction([1.0, 2.0, 3.0], [10.0, 20.0, 30.0])
        np.testing.assert_array_equal(phi(np.array([1.0, 1.4, 1.5, 1.6, 3.0])), [10, 10, 10, 20, 30])

    def test_linear(self):
        phi = SumFunction([1.0, 2.0], [0.0, 1.0], Interpolation.PIECEWISE_LINEAR)
        assert phi(1.25) == 0.25

    def test_outside_span(self):
        phi = SumFunction([1.0, 2.0], [0.0, 1.0])
        with pytest.raises(DomainError):
            phi(2.5)

    @pytest.mark.parametrize("knots, values", [([2.0, 1.0], [0, 0]), ([1.0], [0, 1]), ([], [])])
    def test_invalid(self, knots, values):
        with pytest.raises(UsageError):
            SumFunction(knots, values)


class TestEntropyFn:
    def test_examples(self):
        f = EntropyFn(const_family(1.0, 2.0, -1.0))
        # 1 + 1 + 1 - 1 and 1 + 4 + 0 - 1
        assert eval_entropy_fn(f, 1, 1, 1) == 2.0
        assert eval_entropy_fn(f, 1, 2, 0) == 4.0
        g = EntropyFn(const_family(0.0, 0.0, 5.0))
        assert eval_entropy_fn(g, 0.3, 2.0, 0.0) == 5.0

    def test_two_zeros_rejected(self):
        f = EntropyFn(const_family(1.0, 2.0, -1.0))
        with pytest.raises(DomainError):
            f(1.0, 0.0, 0.0)
        with pytest.raises(DomainError):
            f(-1.0, 1.0, 1.0)

    def test_sum_outside_phi(self):
        f = EntropyFn(const_family(1.0, 2.0, -1.0, lo=1.0, hi=2.0))
        with pytest.raises(DomainError):
            f(1.0, 1.0, 1.0)

    def test_empty_candidate_is_zero(self):
        assert eval_entropy_fn(EntropyFn(), 1, 2, 3) == 0.0

    @given(positive, positive, st.one_of(st.just(0.0), positive), st.sampled_from([-2.0, -0.5, 0.0, 0.5, 2.0, 3.0]))
    def test_permutation_symmetric_bitwise(self, x, y, z, alpha):
        f = EntropyFn(const_family(1.7, alpha, -1.7, lo=0.0, hi=4e3))
        ref = f(x, y, z)
        for p in itertools.permutations((x, y, z)):
            assert f(*p) == ref

    def test_from_callable(self):
        f = from_callable(lambda x, y, z: x)
        assert eval_entropy_fn(f, 3, 1, 2) == 3.0


class TestSupOver:
    def test_examples(self):
        assert sup_over([(1, 0, 0)], lambda p: -3) == 3
        assert sup_over([(1, 0), (2, 0)], lambda p: 0) == 0
        assert sup_over([(1, 0), (2, 0)], lambda p: p[0]) == 2

    def test_empty(self):
        with pytest.raises(UsageError):
            sup_over([], lambda p: 0)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1), st.randoms())
    def test_permutation_invariant(self, values, rnd):
        shuffled = list(values)
        rnd.shuffle(shuffled)
        assert sup_over(values, lambda v: v) == sup_over(shuffled, lambda v: v)


def test_exact_family_closure():
    fam = SolutionFamily.exact(2.0, -1.0, 0.75, 12.0)
    assert fam.phi(1.0) == -2.0
    assert fam.phi.span == (0.75, 12.0)
