"""Constructive sum-factorisation of near-associative two-variable tables.

Given ``A`` on ``(U+V) x W`` and ``B`` on ``U x (V+W)`` with
``|A(u+v, w) - B(u, v+w)| <= eps``, build ``phi`` on ``U+V+W`` by the
window-gluing construction: candidates ``A(xi - w, w)`` read off at the two
endpoints of overlapping windows covering ``W``, selected per window and then
across windows.

All intervals share one lattice step and every set operation is done on
integer step offsets, so membership tests in the case split are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import DomainError, StabilityError, SumFunction, UsageError

_REL = 1e-9


class ConstructionError(StabilityError):
    """No admissible window cover exists for the given intervals."""


class HypothesisViolation(StabilityError):
    """The tables violate the near-associativity hypothesis for the given eps."""

    def __init__(self, message: str, witness: tuple[float, float, float], measured: float):
        super().__init__(message)
        self.witness = witness
        self.measured = measured


@dataclass(frozen=True)
class IntervalSpec:
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise UsageError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if not self.step > 0:
            raise UsageError(f"step must be positive, got {self.step}")
        k = (self.hi - self.lo) / self.step
        if abs(k - round(k)) > _REL * max(1.0, k):
            raise UsageError(f"[{self.lo}, {self.hi}] is not closed by step {self.step}")

    @property
    def steps(self) -> int:
        return int(round((self.hi - self.lo) / self.step))

    @property
    def size(self) -> int:
        return self.steps + 1

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def points(self) -> np.ndarray:
        pts = self.lo + self.step * np.arange(self.size)
        pts[-1] = self.hi
        return pts

    def index(self, value) -> np.ndarray:
        """Lattice index of each value; off-lattice values raise DomainError."""
        pos = (np.asarray(value, dtype=float) - self.lo) / self.step
        idx = np.rint(pos).astype(np.int64)
        if np.any(np.abs(pos - idx) > 1e-6) or np.any(idx < 0) or np.any(idx > self.steps):
            raise DomainError(f"{value!r} is not on the lattice of [{self.lo}, {self.hi}] step {self.step}")
        return idx

    def same_step(self, other: "IntervalSpec") -> bool:
        return abs(self.step - other.step) <= 1e-12 * max(self.step, other.step)

    def __add__(self, other: "IntervalSpec") -> "IntervalSpec":
        if not self.same_step(other):
            raise UsageError("interval sum needs a shared lattice step")
        return IntervalSpec(self.lo + other.lo, self.hi + other.hi, self.step)

    def matches(self, other: "IntervalSpec") -> bool:
        tol = 1e-9 * self.step
        return self.same_step(other) and abs(self.lo - other.lo) <= tol and abs(self.hi - other.hi) <= tol

    def contains(self, other: "IntervalSpec") -> bool:
        """Lattice inclusion: ``other`` inside ``self`` on aligned points."""
        if not self.same_step(other):
            return False
        tol = 1e-9 * self.step
        if other.lo < self.lo - tol or other.hi > self.hi + tol:
            return False
        off = (other.lo - self.lo) / self.step
        return abs(off - round(off)) <= 1e-6


@dataclass(frozen=True)
class IntervalFn2:
    """A table of values on the lattice product ``dom1 x dom2``."""

    dom1: IntervalSpec
    dom2: IntervalSpec
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.shape != (self.dom1.size, self.dom2.size):
            raise UsageError(f"table shape {table.shape} != lattice {(self.dom1.size, self.dom2.size)}")
        if not np.all(np.isfinite(table)):
            raise UsageError("table values must be finite")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_function(cls, dom1: IntervalSpec, dom2: IntervalSpec, g: Callable) -> "IntervalFn2":
        p, q = np.meshgrid(dom1.points(), dom2.points(), indexing="ij")
        return cls(dom1, dom2, np.asarray(g(p, q), dtype=float))

    def at(self, p, q):
        out = self.table[self.dom1.index(p), self.dom2.index(q)]
        return out if np.ndim(out) else float(out)

    def restrict(self, dom1: IntervalSpec, dom2: IntervalSpec) -> "IntervalFn2":
        if not (self.dom1.contains(dom1) and self.dom2.contains(dom2)):
            raise UsageError("restriction domain is not a sub-lattice")
        i0 = int(self.dom1.index(dom1.lo))
        j0 = int(self.dom2.index(dom2.lo))
        return IntervalFn2(dom1, dom2, self.table[i0 : i0 + dom1.size, j0 : j0 + dom2.size])


@dataclass(frozen=True)
class GlueResult:
    domain: IntervalSpec
    values: np.ndarray = field(repr=False)
    dev_A: float
    dev_B: float
    eps: float
    cover: list[tuple[float, float]]
    worst_A: tuple[float, float] = (math.nan, math.nan)
    worst_B: tuple[float, float] = (math.nan, math.nan)

    def phi(self, xi):
        out = self.values[self.domain.index(xi)]
        return out if np.ndim(out) else float(out)

    def as_sum_function(self) -> SumFunction:
        return SumFunction(self.domain.points(), self.values)

    @property
    def ok_A(self) -> bool:
        return self.dev_A <= 2 * self.eps + _slack(self.eps)

    @property
    def ok_B(self) -> bool:
        return self.dev_B <= self.eps + _slack(self.eps)

    @property
    def ok(self) -> bool:
        return self.ok_A and self.ok_B


def _slack(eps: float) -> float:
    return 1e-12 * (1.0 + eps)


# ------------------------------------------------------------------ cover


def _window_steps(W: IntervalSpec, V: IntervalSpec) -> int:
    """Largest whole number of W-steps strictly shorter than V."""
    ratio = V.length / W.step
    return int(math.ceil(ratio - 1e-9)) - 1


def _cover_indices(nw: int, width: int) -> list[tuple[int, int]]:
    if width >= nw:
        return [(0, nw)]
    if width < 2:
        raise ConstructionError(
            "V spans too few lattice steps: windows must be at least two steps wide to interleave"
        )
    stride = max(1, width // 2)
    windows = []
    start = 0
    while start + width < nw:
        windows.append((start, start + width))
        start += stride
    windows.append((nw - width, nw))
    return windows


def cover_W(W: IntervalSpec, V: IntervalSpec) -> list[tuple[float, float]]:
    """Overlapping lattice windows covering ``W``, each shorter than ``V``.

    Consecutive windows interleave strictly: ``w1[k] < w1[k+1] < w2[k] < w2[k+1]``.
    """
    width = _window_steps(W, V)
    if width < 1:
        raise ConstructionError("V is not longer than one lattice step")
    pts = W.points()
    return [(float(pts[i]), float(pts[j])) for i, j in _cover_indices(W.steps, width)]


def is_admissible_cover(cover: Sequence[tuple[float, float]], W: IntervalSpec, V: IntervalSpec) -> bool:
    """Check the three window conditions directly on real endpoints."""
    if not cover:
        return False
    tol = 1e-12 * max(1.0, abs(W.lo), abs(W.hi))
    if max(w2 - w1 for w1, w2 in cover) >= V.length:
        return False
    if any(w1 < W.lo - tol or w2 > W.hi + tol or w1 >= w2 for w1, w2 in cover):
        return False
    if abs(cover[0][0] - W.lo) > tol or abs(cover[-1][1] - W.hi) > tol:
        return False
    for (a1, a2), (b1, b2) in zip(cover, cover[1:]):
        if not (a1 < b1 < a2 < b2):
            return False
    # interleaving makes consecutive windows overlap, so the union is all of W
    return True


# -------------------------------------------------------------- construction


def _check_domains(A: IntervalFn2, B: IntervalFn2, U: IntervalSpec, V: IntervalSpec, W: IntervalSpec) -> None:
    if not (U.same_step(V) and V.same_step(W)):
        raise UsageError("U, V and W must share one lattice step")
    checks = [
        (A.dom1, U + V, "A first domain != U+V"),
        (A.dom2, W, "A second domain != W"),
        (B.dom1, U, "B first domain != U"),
        (B.dom2, V + W, "B second domain != V+W"),
    ]
    for got, want, msg in checks:
        if not got.matches(want):
            raise UsageError(f"lattice mismatch: {msg} ({got} vs {want})")


def measure_assoc_eps(A: IntervalFn2, B: IntervalFn2, U: IntervalSpec, V: IntervalSpec, W: IntervalSpec):
    """Exact sup of ``|A(u+v, w) - B(u, v+w)|`` over the lattice and its witness."""
    _check_domains(A, B, U, V, W)
    iu, iv, iw = np.meshgrid(np.arange(U.size), np.arange(V.size), np.arange(W.size), indexing="ij")
    diff = np.abs(A.table[iu + iv, iw] - B.table[iu, iv + iw])
    k = int(np.argmax(diff))
    witness = (float(U.points()[iu.flat[k]]), float(V.points()[iv.flat[k]]), float(W.points()[iw.flat[k]]))
    return float(diff.flat[k]), witness


def infer_intervals(A: IntervalFn2, B: IntervalFn2) -> tuple[IntervalSpec, IntervalSpec, IntervalSpec]:
    """Recover ``U, V, W`` from the table domains of ``A`` and ``B``."""
    U, W = B.dom1, A.dom2
    try:
        V = IntervalSpec(A.dom1.lo - U.lo, A.dom1.hi - U.hi, U.step)
    except UsageError as exc:
        raise UsageError(f"table domains do not determine V: {exc}") from exc
    return U, V, W


def _deviations(A: IntervalFn2, B: IntervalFn2, values: np.ndarray):
    n1, n2 = A.table.shape
    dA = np.abs(A.table - values[np.add.outer(np.arange(n1), np.arange(n2))])
    m1, m2 = B.table.shape
    dB = np.abs(B.table - values[np.add.outer(np.arange(m1), np.arange(m2))])
    ia = np.unravel_index(int(np.argmax(dA)), dA.shape)
    ib = np.unravel_index(int(np.argmax(dB)), dB.shape)
    worst_A = (float(A.dom1.points()[ia[0]]), float(A.dom2.points()[ia[1]]))
    worst_B = (float(B.dom1.points()[ib[0]]), float(B.dom2.points()[ib[1]]))
    return float(dA.max()), float(dB.max()), worst_A, worst_B


def build_phi(
    A: IntervalFn2,
    B: IntervalFn2,
    U: IntervalSpec,
    V: IntervalSpec,
    W: IntervalSpec,
    eps: Optional[float] = None,
) -> GlueResult:
    """Glue ``phi`` on ``U+V+W`` from endpoint readings of ``A``.

    ``eps`` defaults to the measured hypothesis sup; a supplied ``eps``
    smaller than the measurement raises :class:`HypothesisViolation`.
    """
    measured, witness = measure_assoc_eps(A, B, U, V, W)
    if eps is None:
        eps = measured
    elif measured > eps + _slack(eps):
        raise HypothesisViolation(
            f"|A(u+v,w) - B(u,v+w)| = {measured:.17g} > eps = {eps:.17g} at (u,v,w) = {witness}",
            witness,
            measured,
        )
    width = _window_steps(W, V)
    if width < 1:
        raise ConstructionError("V is not longer than one lattice step")
    windows = _cover_indices(W.steps, width)
    span = U.steps + V.steps  # steps of U+V
    total = span + W.steps
    values = np.empty(total + 1)
    for xi in range(total + 1):
        # windows whose shifted copy U+V+W^(k) contains xi; overlaps go to the last one
        k = max(j for j, (w1, w2) in enumerate(windows) if w1 <= xi <= w2 + span)
        w1, w2 = windows[k]
        # (U+V+w1) minus (U+V+w2) is the half-open segment [w1, w2)
        w = w1 if xi < w2 else w2
        values[xi] = A.table[xi - w, w]
    dev_A, dev_B, worst_A, worst_B = _deviations(A, B, values)
    pts = W.points()
    cover = [(float(pts[i]), float(pts[j])) for i, j in windows]
    return GlueResult(U + V + W, values, dev_A, dev_B, float(eps), cover, worst_A, worst_B)


@dataclass(frozen=True)
class GlueInstance:
    U: IntervalSpec
    V: IntervalSpec
    W: IntervalSpec
    A: IntervalFn2
    B: IntervalFn2

    @classmethod
    def restricted(cls, A: IntervalFn2, B: IntervalFn2, U, V, W) -> "GlueInstance":
        return cls(U, V, W, A.restrict(U + V, W), B.restrict(U, V + W))


def extend_phi_nested(instances: Sequence[GlueInstance], eps: Optional[float] = None) -> GlueResult:
    """Patch per-instance constructions over an increasing sequence of domains.

    ``phi`` follows the first instance on its own domain and the n-th
    instance on what the n-th domain adds to the previous one.  Deviations
    are measured on the last (largest) instance.
    """
    instances = list(instances)
    if not instances:
        raise UsageError("no instances")
    for prev, cur in zip(instances, instances[1:]):
        for a, b, name in ((prev.U, cur.U, "U"), (prev.V, cur.V, "V"), (prev.W, cur.W, "W")):
            if not b.contains(a):
                raise UsageError(f"instances are not nested in {name}")
    if eps is None:
        eps = max(measure_assoc_eps(i.A, i.B, i.U, i.V, i.W)[0] for i in instances)
    parts = [build_phi(i.A, i.B, i.U, i.V, i.W, eps) for i in instances]
    if len(parts) == 1:
        return parts[0]
    last = instances[-1]
    domain = last.U + last.V + last.W
    xs = domain.points()
    values = np.empty(domain.size)
    assigned = np.zeros(domain.size, dtype=bool)
    for part in parts:
        inside = (xs >= part.domain.lo - 1e-9 * domain.step) & (xs <= part.domain.hi + 1e-9 * domain.step)
        fresh = inside & ~assigned
        if np.any(fresh):
            values[fresh] = part.phi(xs[fresh])
        assigned |= inside
    dev_A, dev_B, worst_A, worst_B = _deviations(last.A, last.B, values)
    return GlueResult(domain, values, dev_A, dev_B, float(eps), parts[-1].cover, worst_A, worst_B)


# --------------------------------------------------------------- instances


def noisy_instance(
    seed: int,
    amplitude: float,
    step: float = 0.125,
    max_steps: int = 16,
    g: Optional[Callable] = None,
) -> GlueInstance:
    """Seeded ``A = g(p+q) + noise``, ``B = g(t+s) + noise`` on random intervals.

    Interval lengths are at most ``max_steps`` lattice steps; ``V`` gets at
    least three so that an interleaving cover exists.
    """
    rng = np.random.default_rng(seed)

    def interval(min_steps):
        k = int(rng.integers(min_steps, max_steps + 1))
        lo = step * int(rng.integers(0, max_steps + 1))
        return IntervalSpec(lo, lo + k * step, step)

    U, V, W = interval(1), interval(3), interval(1)
    if g is None:
        c = rng.normal(size=3)

        def g(xi):
            return c[0] * np.sin(c[1] * xi) + c[2] * xi**2

    A = IntervalFn2.from_function(U + V, W, lambda p, q: g(p + q))
    B = IntervalFn2.from_function(U, V + W, lambda t, s: g(t + s))
    A = IntervalFn2(A.dom1, A.dom2, A.table + rng.uniform(-amplitude, amplitude, A.table.shape))
    B = IntervalFn2(B.dom1, B.dom2, B.table + rng.uniform(-amplitude, amplitude, B.table.shape))
    return GlueInstance(U, V, W, A, B)
