import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropy_stability.core import Box3, EntropyFn, SolutionFamily, SumFunction, UsageError, from_callable
from entropy_stability.fit import (
    IllPosedError,
    SearchRangeError,
    brute_force_fit,
    brute_force_h_fit,
    bucket_by_sum,
    fit_family,
    fit_h_const,
    fit_h_family,
    fit_objective,
    golden_section,
    phi_midrange,
    verdict,
)
from entropy_stability.perturb import NoiseField, perturb

from conftest import exact_fn, zoom_brute_force


def test_bucket_by_sum():
    pts = [(1, 1, 1), (1, 2, 0), (2, 2, 2)]
    groups = bucket_by_sum(pts, 1.0)
    assert sorted(groups) == [3.0, 6.0]
    np.testing.assert_array_equal(groups[3.0], [0, 1])


def test_bucket_rejects_off_knot():
    with pytest.raises(UsageError):
        bucket_by_sum([(0.1, 1, 1)], 1.0)


@given(st.lists(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=8), min_size=1, max_size=6))
def test_midrange_minimises_sup(groups):
    mids, halves = phi_midrange(groups)
    for g, m, h in zip(groups, mids, halves):
        g = np.array(g)
        assert np.abs(g - m).max() == pytest.approx(h, rel=1e-12, abs=1e-9)
        for shift in (-1e-3 * (1 + h), 1e-3 * (1 + h)):
            assert np.abs(g - (m + shift)).max() >= h


def test_golden_section():
    x, fx = golden_section(lambda t: abs(t - 0.3), -1.0, 2.0)
    assert x == pytest.approx(0.3, abs=1e-10) and fx <= 1e-10


@pytest.mark.parametrize("alpha", [-2.0, -1.0, -0.5, 0.5, 2.0, 3.0])
@pytest.mark.parametrize("a", [-1.0, 2.0])
def test_exact_family_recovered(alpha, a):
    box = Box3.default(4.0, 8)
    rep = fit_family(exact_fn(a, alpha, box), alpha, box)
    assert rep.best_a == pytest.approx(a, abs=1e-9)
    assert rep.sup_error <= 1e-9


def test_alpha_zero_fits_phi_only():
    box = Box3.default(4.0, 8)
    rep = fit_family(exact_fn(3.0, 0.0, box), 0.0, box)
    assert rep.best_a == 0.0 and rep.sup_error <= 1e-12


def test_search_range_edge():
    box = Box3.default(4.0, 6)
    with pytest.raises(SearchRangeError):
        fit_family(exact_fn(5000.0, 2.0, box), 2.0, box)


def test_unidentifiable():
    # on a two-point axis every sum group holds permutations of one triple
    box = Box3(1.0, 2.0, 2)
    with pytest.raises(IllPosedError):
        fit_family(from_callable(lambda x, y, z: x), 2.0, box)


@pytest.mark.parametrize("seed", range(5))
def test_fit_matches_zoom_oracle(seed):
    box = Box3.default(4.0, 4)
    f = perturb(exact_fn(1.0, 2.0, box).family, NoiseField.for_box(seed, 0.1, box), box)
    fast = fit_family(f, 2.0, box)
    slow = zoom_brute_force(lambda grid: brute_force_fit(f, 2.0, box, grid))
    assert abs(fast.sup_error - slow.sup_error) <= 1e-6
    assert fast.sup_error <= fit_objective(f, 2.0, box, 1.0) + 1e-15


def test_h_family_recovers_plant():
    xs = np.linspace(0.05, 0.95, 19)
    hs = 1.0 * xs**2 - 2.0 * ((1 - xs) ** 2 - 1)
    fit = fit_h_family(xs, hs, 2.0)
    assert fit.a == pytest.approx(1.0, abs=1e-6) and fit.b == pytest.approx(-2.0, abs=1e-6)
    assert fit.sup_error <= 1e-9


def test_h_family_against_grid_oracle():
    rng = np.random.default_rng(3)
    xs = np.linspace(0.1, 0.9, 9)
    hs = 0.5 * xs**-1.0 + 0.25 * ((1 - xs) ** -1.0 - 1) + rng.uniform(-0.05, 0.05, xs.size)
    fit = fit_h_family(xs, hs, -1.0)
    grid = brute_force_h_fit(xs, hs, -1.0, np.linspace(0, 1, 101), np.linspace(0, 1, 101))
    assert fit.sup_error <= grid.sup_error + 1e-12


def test_h_family_needs_samples():
    with pytest.raises(IllPosedError):
        fit_h_family([0.5, 0.5, 0.5], [0, 0, 0], 2.0)
    with pytest.raises(UsageError):
        fit_h_family([0.0, 0.5, 0.7], [0, 0, 0], 2.0)


def test_h_const():
    assert fit_h_const([1.0, 3.0, 2.0]) == (2.0, 1.0)


class TestVerdict:
    def test_exact_passes(self):
        box = Box3.default(4.0, 8)
        rep = verdict(exact_fn(1.0, -1.0, box), -1.0, box)
        assert rep.passed and rep.sup_error <= 1e-12

    def test_positive_needs_n_covering_box(self):
        box = Box3.default(2.0, 8)
        with pytest.raises(UsageError):
            verdict(exact_fn(1.0, 2.0, box), 2.0, box, n=1)
        with pytest.raises(UsageError):
            verdict(exact_fn(1.0, 2.0, box), 2.0, box)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**31), st.sampled_from([-1.0, 0.0]))
    def test_noisy_passes(self, seed, alpha):
        box = Box3.default(4.0, 8)
        f = perturb(exact_fn(1.0, alpha, box).family, NoiseField.for_box(seed, 1e-3, box), box)
        assert verdict(f, alpha, box).passed
