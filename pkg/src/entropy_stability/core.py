"""Domain types, the candidate-function model and sup-norm utilities.

Everything here is vectorised over numpy arrays: a candidate ``f`` is called
as ``f(x, y, z)`` with broadcastable coordinate arrays.  Scalar helpers
(:func:`eval_entropy_fn`, :func:`power_term`) wrap the array paths.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np


class StabilityError(Exception):
    """Base class for every error raised by this package."""


class DomainError(StabilityError, ValueError):
    """A point lies outside the set where a function is defined."""


class UsageError(StabilityError, ValueError):
    """Arguments are inconsistent or malformed."""


class Regime(str, enum.Enum):
    NEGATIVE = "negative"
    ZERO = "zero"
    POSITIVE_NOT_ONE = "positive"


@dataclass(frozen=True)
class AlphaCase:
    """The exponent of ``mu(x) = x**alpha`` together with its regime."""

    alpha: float
    regime: Regime

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise UsageError(f"alpha must be finite, got {self.alpha!r}")
        if self.alpha == 1.0:
            raise UsageError("alpha = 1 is excluded")
        if self.regime is not _regime_of(self.alpha):
            raise UsageError(f"regime {self.regime.value} inconsistent with alpha={self.alpha}")

    @classmethod
    def from_alpha(cls, alpha: float) -> "AlphaCase":
        alpha = float(alpha)
        if alpha == 1.0:
            raise UsageError("alpha = 1 is excluded")
        return cls(alpha, _regime_of(alpha))


def _regime_of(alpha: float) -> Regime:
    if alpha < 0:
        return Regime.NEGATIVE
    if alpha == 0:
        return Regime.ZERO
    return Regime.POSITIVE_NOT_ONE


@dataclass(frozen=True)
class Box3:
    """The cube ``[lo, n]**3`` sampled by ``grid`` points per axis."""

    lo: float
    n: float
    grid: int

    def __post_init__(self):
        if not (0 < self.lo < self.n):
            raise UsageError(f"need 0 < lo < n, got lo={self.lo}, n={self.n}")
        if int(self.grid) != self.grid or self.grid < 2:
            raise UsageError(f"grid must be an integer >= 2, got {self.grid}")

    @classmethod
    def default(cls, n: float, grid: int) -> "Box3":
        """Box with the clipped lower corner ``lo = n / grid``."""
        return cls(n / grid, n, grid)

    @property
    def step(self) -> float:
        return (self.n - self.lo) / (self.grid - 1)

    def axis(self) -> np.ndarray:
        i = np.arange(self.grid, dtype=float)
        pts = self.lo + i * self.step
        pts[-1] = self.n
        return pts

    def points(self) -> np.ndarray:
        """All lattice triples as an ``(grid**3, 3)`` array in C order."""
        ax = self.axis()
        x, y, z = np.meshgrid(ax, ax, ax, indexing="ij")
        return np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)


@dataclass(frozen=True)
class SimplexGrid:
    """Interior points ``(i/m, j/m)`` of the open triangle x, y, x+y in (0, 1)."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 3:
            raise UsageError(f"simplex subdivision must be an integer >= 3, got {self.m}")

    @property
    def points(self) -> list[tuple[float, float]]:
        return [tuple(p) for p in self.array()]

    def array(self) -> np.ndarray:
        m = self.m
        pairs = [(i / m, j / m) for i in range(1, m) for j in range(1, m - i)]
        return np.array(pairs, dtype=float).reshape(-1, 2)


class Interpolation(str, enum.Enum):
    NEAREST_BUCKET = "nearest"
    PIECEWISE_LINEAR = "linear"


class SumFunction:
    """A tabulated function of the coordinate sum ``s = x + y + z``."""

    def __init__(self, knots, values, interpolation=Interpolation.NEAREST_BUCKET):
        knots = np.asarray(knots, dtype=float).ravel()
        values = np.asarray(values, dtype=float).ravel()
        if knots.size == 0 or knots.size != values.size:
            raise UsageError("knots and values must be nonempty and of equal length")
        if np.any(np.diff(knots) <= 0):
            raise UsageError("knots must be strictly increasing")
        if not (np.all(np.isfinite(knots)) and np.all(np.isfinite(values))):
            raise UsageError("knots and values must be finite")
        self.knots = knots
        self.values = values
        self.interpolation = Interpolation(interpolation)
        self._tol = 1e-9 * max(1.0, abs(knots[0]), abs(knots[-1]))

    @classmethod
    def constant(cls, value: float, lo: float, hi: float) -> "SumFunction":
        return cls([lo, hi], [value, value])

    @property
    def span(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        lo, hi = self.span
        bad = (s < lo - self._tol) | (s > hi + self._tol) | ~np.isfinite(s)
        if np.any(bad):
            first = float(np.atleast_1d(s)[np.atleast_1d(bad)][0])
            raise DomainError(f"sum {first!r} outside the span [{lo}, {hi}] of phi")
        if self.interpolation is Interpolation.PIECEWISE_LINEAR:
            return np.interp(s, self.knots, self.values)
        idx = np.searchsorted(self.knots, s)
        idx = np.clip(idx, 1, max(1, self.knots.size - 1))
        if self.knots.size == 1:
            return np.full(s.shape, self.values[0])
        left = self.knots[idx - 1]
        right = self.knots[idx]
        # ties go to the lower knot
        pick = np.where(s - left <= right - s, idx - 1, idx)
        return self.values[pick]

    def __eq__(self, other):
        if not isinstance(other, SumFunction):
            return NotImplemented
        return (
            self.interpolation is other.interpolation
            and np.array_equal(self.knots, other.knots)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        lo, hi = self.span
        return f"SumFunction({self.knots.size} knots on [{lo:g}, {hi:g}], {self.interpolation.value})"


def power_term(t, alpha: float):
    """``t**alpha`` for ``t > 0`` and ``0`` at ``t = 0`` for every alpha."""
    t = np.asarray(t, dtype=float)
    pos = t > 0
    safe = np.where(pos, t, 1.0)
    out = np.where(pos, safe**alpha, 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SolutionFamily:
    """``a*(x**alpha + y**alpha + z**alpha) + phi(x + y + z)``.

    Zero coordinates drop out of the power sum, see :func:`power_term`.
    """

    a: float
    alpha: float
    phi: SumFunction

    def __post_init__(self):
        if self.alpha == 1.0:
            raise UsageError("alpha = 1 is excluded")

    @classmethod
    def exact(cls, a: float, alpha: float, sum_lo: float, sum_hi: float) -> "SolutionFamily":
        """Family with constant phi at the boundary-closure value ``-a``.

        The span ``[sum_lo, sum_hi]`` is widened to contain 1, where the
        equation evaluates ``f(0, y', z')``.
        """
        lo, hi = min(sum_lo, 1.0), max(sum_hi, 1.0)
        return cls(float(a), float(alpha), SumFunction.constant(closure_value(a), lo, hi))

    @classmethod
    def exact_for_box(cls, a: float, alpha: float, box: Box3) -> "SolutionFamily":
        return cls.exact(a, alpha, 3 * box.lo, 3 * box.n)

    def __call__(self, x, y, z):
        c = _sorted_coords(x, y, z)
        p = power_term(c[0], self.alpha) + power_term(c[1], self.alpha) + power_term(c[2], self.alpha)
        s = c[0] + c[1] + c[2]
        return self.a * p + self.phi(s)


def closure_value(a: float) -> float:
    """phi(1) making the extended family solve the equation at boundary terms."""
    return -float(a)


def _sorted_coords(x, y, z) -> np.ndarray:
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    return np.sort(np.stack([x, y, z]), axis=0)


def check_point(x, y, z) -> None:
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    stack = np.stack([x, y, z])
    if not np.all(np.isfinite(stack)) or np.any(stack < 0):
        raise DomainError("coordinates must be finite and nonnegative")
    zeros = np.sum(stack == 0, axis=0)
    if np.any(zeros > 1):
        i = int(np.argmax(np.ravel(zeros) > 1))
        pt = tuple(float(v) for v in stack.reshape(3, -1)[:, i])
        raise DomainError(f"more than one zero coordinate at {pt}")


@dataclass(frozen=True)
class EntropyFn:
    """Candidate solution: optional exact family plus optional noise field.

    ``noise`` is any object with a vectorised ``values(x, y, z)`` method,
    normally a :class:`entropy_stability.perturb.NoiseField`.
    """

    family: Optional[SolutionFamily] = None
    noise: Optional[object] = None
    domain: Optional[Box3] = None
    extra: Optional[Callable] = field(default=None, compare=False)

    def __call__(self, x, y, z):
        check_point(x, y, z)
        shape = np.broadcast(np.asarray(x), np.asarray(y), np.asarray(z)).shape
        out = np.zeros(shape)
        if self.family is not None:
            out = out + self.family(x, y, z)
        if self.extra is not None:
            out = out + self.extra(x, y, z)
        if self.noise is not None:
            out = out + self.noise.values(x, y, z)
        return out


def eval_entropy_fn(f: EntropyFn, x: float, y: float, z: float) -> float:
    return float(f(x, y, z))


def from_callable(g: Callable, domain: Optional[Box3] = None) -> EntropyFn:
    """Wrap an arbitrary vectorised ``g(x, y, z)`` as a candidate."""
    return EntropyFn(domain=domain, extra=g)


def sup_over(samples: Sequence, g: Callable) -> float:
    """``max |g(p)|`` over a nonempty list of sample points."""
    samples = list(samples)
    if not samples:
        raise UsageError("sup over an empty sample list")
    return max(abs(float(g(p))) for p in samples)


def sup_abs(values: Iterable[float] | np.ndarray) -> float:
    arr = np.abs(np.asarray(values, dtype=float))
    if arr.size == 0:
        raise UsageError("sup over an empty sample list")
    return float(arr.max())
