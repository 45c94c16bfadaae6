"""Sup-norm recovery of the nearest exact solution and the bound verdicts.

The three-variable fit minimises ``max |f - a*P - phi(s)|`` over ``a`` and a
free sum-function ``phi``.  For fixed ``a`` the optimal ``phi`` is the
midrange of the residuals inside each group of equal coordinate sum, so only
a one-dimensional search over ``a`` remains.  That objective is a maximum of
convex piecewise-linear functions, hence convex, and a coarse grid followed by
golden-section refinement inside the bracketing cells finds its minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .constants import BoundSpec, bound_for
from .core import (
    AlphaCase,
    Box3,
    EntropyFn,
    Regime,
    SolutionFamily,
    StabilityError,
    SumFunction,
    UsageError,
    power_term,
)
from .residuals import EpsPair, measure_eps

__all__ = [
    "SolutionFamily",
    "FitReport",
    "HFit",
    "bucket_by_sum",
    "phi_midrange",
    "fit_family",
    "brute_force_fit",
    "fit_h_family",
    "brute_force_h_fit",
    "fit_h_const",
    "verdict",
    "golden_section",
]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class SearchRangeError(StabilityError):
    """The coarse search put the optimum on the edge of the parameter range."""


class IllPosedError(StabilityError, ValueError):
    """The samples do not determine the fitted parameters."""


@dataclass(frozen=True)
class FitReport:
    best_a: float
    phi: SumFunction
    sup_error: float
    eps: Optional[EpsPair] = None
    bound: Optional[BoundSpec] = None
    bound_value: Optional[float] = None
    passed: Optional[bool] = None

    @property
    def slack(self) -> Optional[float]:
        if self.bound_value is None:
            return None
        return self.bound_value - self.sup_error


@dataclass(frozen=True)
class HFit:
    a: float
    b: float
    sup_error: float


# ---------------------------------------------------------------- grouping


def bucket_by_sum(points, step: float, origin: float = 0.0) -> dict[float, np.ndarray]:
    """Partition sample indices by coordinate sum.

    Sums must sit on the knots ``origin + k*step``; the returned keys are
    those knot values, the values index arrays into ``points``.
    """
    keys, ints = _sum_keys(points, step, origin)
    out = {}
    for k in np.unique(ints):
        out[float(origin + k * step)] = np.flatnonzero(ints == k)
    return out


def _sum_keys(points, step: float, origin: float) -> tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if pts.shape[0] == 0:
        raise UsageError("no samples to bucket")
    if not step > 0:
        raise UsageError(f"knot step must be positive, got {step!r}")
    srt = np.sort(pts, axis=1)
    s = srt[:, 0] + srt[:, 1] + srt[:, 2]
    pos = (s - origin) / step
    ints = np.rint(pos).astype(np.int64)
    off = np.abs(pos - ints)
    if np.any(off > 1e-6):
        i = int(np.argmax(off))
        raise UsageError(f"sum {s[i]!r} of {tuple(pts[i])} is not on a knot origin + k*step")
    return s, ints


class _Groups:
    """Samples sorted by sum-group so per-group extrema are one reduceat."""

    def __init__(self, ints: np.ndarray):
        self.order = np.argsort(ints, kind="stable")
        sorted_ints = ints[self.order]
        self.starts = np.flatnonzero(np.r_[True, np.diff(sorted_ints) != 0])
        self.keys = sorted_ints[self.starts]

    def extrema(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        v = values[self.order]
        return np.maximum.reduceat(v, self.starts), np.minimum.reduceat(v, self.starts)


def phi_midrange(residuals_per_group: Sequence[Sequence[float]]) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev centre and radius of each group of residuals."""
    mids, halves = [], []
    for group in residuals_per_group:
        g = np.asarray(group, dtype=float)
        if g.size == 0:
            raise UsageError("empty residual group")
        hi, lo = g.max(), g.min()
        mids.append((hi + lo) / 2.0)
        halves.append((hi - lo) / 2.0)
    return np.array(mids), np.array(halves)


# ------------------------------------------------------------ 1-d search


def golden_section(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200):
    """Minimise a unimodal ``fn`` on ``[lo, hi]``; returns ``(x, fn(x))``."""
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        if f2 < f1:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = fn(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = fn(x1)
    best = min(((f1, x1), (f2, x2), (fn(0.5 * (lo + hi)), 0.5 * (lo + hi))))
    return best[1], best[0]


def _grid_argmin(grid: np.ndarray, values: np.ndarray) -> int:
    """Index of the minimum; ties go to the smallest parameter."""
    m = values.min()
    hits = np.flatnonzero(values == m)
    return int(hits[np.argmin(grid[hits])])


def _coarse_then_golden(fn, lo: float, hi: float, coarse: int, tol: float, max_iter: int, what: str):
    grid = np.linspace(lo, hi, coarse)
    values = np.array([fn(a) for a in grid])
    j = _grid_argmin(grid, values)
    if j == 0 or j == coarse - 1:
        raise SearchRangeError(f"{what} optimum at the edge of [{lo:g}, {hi:g}]; widen the search range")
    x, fx = golden_section(fn, grid[j - 1], grid[j + 1], tol, max_iter)
    if values[j] <= fx:
        return float(grid[j]), float(values[j])
    return float(x), float(fx)


# ------------------------------------------------------- three-variable fit


@dataclass
class _Problem:
    values: np.ndarray
    power_sums: np.ndarray
    groups: _Groups
    knots: np.ndarray

    def objective(self, a: float) -> float:
        hi, lo = self.groups.extrema(self.values - a * self.power_sums)
        return float(np.max(hi - lo) / 2.0)

    def phi(self, a: float) -> tuple[SumFunction, float]:
        hi, lo = self.groups.extrema(self.values - a * self.power_sums)
        return SumFunction(self.knots, (hi + lo) / 2.0), float(np.max(hi - lo) / 2.0)


def _problem(f: EntropyFn, alpha: float, box: Box3) -> _Problem:
    pts = box.points()
    _, ints = _sum_keys(pts, box.step, 3 * box.lo)
    groups = _Groups(ints)
    x, y, z = np.sort(pts, axis=1).T
    p = power_term(x, alpha) + power_term(y, alpha) + power_term(z, alpha)
    values = np.asarray(f(*pts.T), dtype=float)
    if not np.all(np.isfinite(values)):
        raise UsageError("candidate is not finite on the fitting lattice")
    knots = 3 * box.lo + groups.keys * box.step
    return _Problem(values, np.asarray(p, dtype=float), groups, knots)


def _check_identifiable(prob: _Problem) -> None:
    hi, lo = prob.groups.extrema(prob.power_sums)
    scale = max(1.0, float(np.abs(prob.power_sums).max()))
    if not np.any(hi - lo > 1e-12 * scale):
        raise IllPosedError("no sum-group holds two triples with distinct power sums; a is unconstrained")


def fit_family(
    f: EntropyFn,
    alpha: float,
    box: Box3,
    a_range: tuple[float, float] = (-1000.0, 1000.0),
    coarse: int = 201,
    tol: float = 1e-13,
    max_iter: int = 300,
) -> FitReport:
    """Nearest ``a*(x^α+y^α+z^α) + phi(x+y+z)`` to ``f`` in the lattice sup norm.

    For ``alpha == 0`` the power sum is constant on the open octant, so only
    ``phi`` is fitted and ``best_a`` is reported as 0.
    """
    case = AlphaCase.from_alpha(alpha)
    prob = _problem(f, alpha, box)
    if case.regime is Regime.ZERO:
        best_a = 0.0
    else:
        _check_identifiable(prob)
        best_a, _ = _coarse_then_golden(prob.objective, a_range[0], a_range[1], coarse, tol, max_iter, "a")
    phi, sup_error = prob.phi(best_a)
    return FitReport(best_a=best_a, phi=phi, sup_error=sup_error)


def fit_objective(f: EntropyFn, alpha: float, box: Box3, a: float) -> float:
    """Best sup error reachable with the given ``a`` (phi optimised)."""
    return _problem(f, alpha, box).objective(a)


def brute_force_fit(f: EntropyFn, alpha: float, box: Box3, a_grid: Sequence[float]) -> FitReport:
    """Exhaustive argmin of the fit objective over an explicit list of ``a``."""
    grid = np.asarray(list(a_grid), dtype=float)
    if grid.size == 0:
        raise UsageError("empty a grid")
    prob = _problem(f, alpha, box)
    values = np.array([prob.objective(a) for a in grid])
    best_a = float(grid[_grid_argmin(grid, values)])
    phi, sup_error = prob.phi(best_a)
    return FitReport(best_a=best_a, phi=phi, sup_error=sup_error)


# --------------------------------------------------------- one-variable fits


def _h_samples(xs, hs) -> tuple[np.ndarray, np.ndarray]:
    xs = np.asarray(xs, dtype=float).ravel()
    hs = np.asarray(hs, dtype=float).ravel()
    if xs.shape != hs.shape:
        raise UsageError("abscissas and values differ in length")
    if np.any((xs <= 0) | (xs >= 1)):
        raise UsageError("abscissas must lie in (0, 1)")
    return xs, hs


def _chebyshev_scale(r: np.ndarray, X: np.ndarray) -> tuple[float, float]:
    """Minimise ``max |r - a*X|`` over ``a`` for strictly positive ``X``.

    ``max(r - aX)`` decreases and ``max(aX - r)`` increases in ``a``; the
    optimum is where they cross, found by bisection.
    """

    def gap(a):
        d = r - a * X
        return d.max() + d.min()  # upper - lower

    lo, hi = -1.0, 1.0
    while gap(lo) < 0:
        lo *= 2.0
    while gap(hi) > 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    best = min((float(np.abs(r - a * X).max()), a) for a in (lo, hi))
    return best[1], best[0]


def fit_h_family(
    xs,
    hs,
    alpha: float,
    b_range: tuple[float, float] = (-1000.0, 1000.0),
    coarse: int = 201,
    tol: float = 1e-13,
) -> HFit:
    """Minimax fit of ``a*x^α + b*((1-x)^α - 1)`` to samples of ``h`` on (0, 1).

    The outer search runs over ``b``; for each ``b`` the best ``a`` is exact.
    """
    alpha = float(alpha)
    if alpha in (0.0, 1.0):
        raise UsageError(f"the two-parameter family needs alpha not in {{0, 1}}, got {alpha:g}")
    xs, hs = _h_samples(xs, hs)
    if np.unique(xs).size < 3:
        raise IllPosedError("need at least 3 distinct abscissas")
    X = xs**alpha
    Y = (1.0 - xs) ** alpha - 1.0

    def inner(b):
        return _chebyshev_scale(hs - b * Y, X)

    b, _ = _coarse_then_golden(lambda b: inner(b)[1], b_range[0], b_range[1], coarse, tol, 300, "b")
    a, err = inner(b)
    return HFit(float(a), float(b), float(err))


def brute_force_h_fit(xs, hs, alpha: float, a_grid, b_grid) -> HFit:
    """Grid oracle for :func:`fit_h_family`."""
    xs, hs = _h_samples(xs, hs)
    X = xs**alpha
    Y = (1.0 - xs) ** alpha - 1.0
    best = None
    for a in np.asarray(a_grid, dtype=float):
        for b in np.asarray(b_grid, dtype=float):
            err = float(np.abs(hs - a * X - b * Y).max())
            if best is None or err < best[0]:
                best = (err, a, b)
    if best is None:
        raise UsageError("empty parameter grid")
    return HFit(float(best[1]), float(best[2]), best[0])


def fit_h_const(hs) -> tuple[float, float]:
    """Midrange constant and its sup deviation."""
    hs = np.asarray(hs, dtype=float).ravel()
    if hs.size == 0:
        raise UsageError("no samples")
    hi, lo = hs.max(), hs.min()
    return float((hi + lo) / 2.0), float((hi - lo) / 2.0)


# ----------------------------------------------------------------- verdict


def verdict_slack(bound_value: float) -> float:
    return 1e-9 * (1.0 + bound_value)


def verdict(f: EntropyFn, alpha: float, box: Box3, n: Optional[int] = None, **fit_kwargs) -> FitReport:
    """Fit, measure the hypotheses and compare against the stability bound."""
    case = AlphaCase.from_alpha(alpha)
    if case.regime is Regime.POSITIVE_NOT_ONE and n is not None and box.n > n:
        raise UsageError(f"box edge {box.n:g} exceeds the bound's box index n={n}")
    bound = bound_for(case, n)
    eps = measure_eps(f, alpha, box)
    report = fit_family(f, alpha, box, **fit_kwargs)
    value = bound.value(eps.eps1, eps.eps2)
    return replace(
        report,
        eps=eps,
        bound=bound,
        bound_value=value,
        passed=bool(report.sup_error <= value + verdict_slack(value)),
    )
