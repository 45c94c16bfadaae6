import numpy as np
import pytest

from entropy_stability.core import Box3, EntropyFn, SolutionFamily, SumFunction


@pytest.fixture
def box16():
    return Box3.default(4.0, 16)


@pytest.fixture
def box20():
    return Box3.default(1.0, 20)


def const_family(a, alpha, value, lo=0.01, hi=20.0):
    return SolutionFamily(a, alpha, SumFunction.constant(value, lo, hi))


def exact_fn(a, alpha, box):
    return EntropyFn(SolutionFamily.exact_for_box(a, alpha, box), domain=box)


def zoom_brute_force(fit_fn, lo=-1000.0, hi=1000.0, points=201, rounds=12):
    """Exhaustive grid search, re-gridded around the best point each round.

    ``fit_fn(grid)`` returns a report with ``best_a`` and ``sup_error``.
    """
    best = None
    for _ in range(rounds):
        report = fit_fn(np.linspace(lo, hi, points))
        if best is None or report.sup_error <= best.sup_error:
            best = report
        width = (hi - lo) / (points - 1)
        lo, hi = best.best_a - 2 * width, best.best_a + 2 * width
    return best
