"""Residual evaluators for the entropy equation, its symmetry hypothesis, the
parametric fundamental equation and the intermediate inequalities of the
stability argument.

Residuals are signed; sups take absolute values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Box3, DomainError, EntropyFn, SimplexGrid, StabilityError, power_term

PERMUTATIONS = tuple(itertools.permutations(range(3)))


class MeasurementError(StabilityError, ArithmeticError):
    """A residual came out non-finite."""


@dataclass(frozen=True)
class EpsPair:
    eps1: float
    eps2: float

    def __post_init__(self):
        for name in ("eps1", "eps2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise MeasurementError(f"{name} must be finite and >= 0, got {v!r}")


def entropy_residual(f: EntropyFn, alpha: float, x, y, z):
    """``f(x,y,z) - f(x,y+z,0) - (y+z)**alpha * f(0, y/(y+z), z/(y+z))``."""
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    if np.any(x <= 0) or np.any(y <= 0) or np.any(z <= 0):
        raise DomainError("entropy residual needs strictly positive coordinates")
    s = y + z
    zero = np.zeros(np.broadcast(x, s).shape)
    r = f(x, y, z) - f(x, s, zero) - power_term(s, alpha) * f(zero, y / s, z / s)
    return r if np.ndim(r) else float(r)


def symmetry_residual(f: EntropyFn, x, y, z):
    """Largest deviation of ``f`` under the six coordinate permutations.

    Points with a single zero coordinate are accepted so that boundary
    symmetry can be measured too.
    """
    coords = np.stack(np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z))))
    base = f(*coords)
    out = np.zeros(base.shape)
    for p in PERMUTATIONS[1:]:
        out = np.maximum(out, np.abs(base - f(coords[p[0]], coords[p[1]], coords[p[2]])))
    return out if out.ndim else float(out)


def in_open_simplex(x, y) -> np.ndarray:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return (x > 0) & (y > 0) & (x + y < 1)


def fundamental_residual(h: Callable, alpha: float, x, y):
    """Signed residual of the parametric fundamental equation of information."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if not np.all(in_open_simplex(x, y)):
        raise DomainError("(x, y) must satisfy x, y, x+y in (0, 1)")
    r = (
        h(x)
        + power_term(1 - x, alpha) * h(y / (1 - x))
        - h(y)
        - power_term(1 - y, alpha) * h(x / (1 - y))
    )
    r = np.asarray(r, dtype=float)
    return r if r.ndim else float(r)


def assoc_residual(A, B, u: float, v: float, w: float) -> float:
    """``|A(u+v, w) - B(u, v+w)|`` for lattice-valued ``A`` and ``B``."""
    return abs(A.at(u + v, w) - B.at(u, v + w))


def _finite_sup(values: np.ndarray, points: np.ndarray, what: str) -> float:
    values = np.abs(np.asarray(values, dtype=float)).ravel()
    if values.size == 0:
        return 0.0
    bad = ~np.isfinite(values)
    if np.any(bad):
        pt = tuple(float(c) for c in points[int(np.argmax(bad))])
        raise MeasurementError(f"non-finite {what} residual at {pt}")
    return float(values.max())


def measure_eps_points(f: EntropyFn, alpha: float, interior: np.ndarray, boundary=None) -> EpsPair:
    """Sup of both hypotheses over explicit point sets.

    ``interior`` rows are positive triples, used for both residuals;
    ``boundary`` rows (one zero coordinate) only enter the symmetry sup.
    """
    interior = np.asarray(interior, dtype=float).reshape(-1, 3)
    x, y, z = interior.T
    eps1 = _finite_sup(entropy_residual(f, alpha, x, y, z), interior, "entropy")
    eps2 = _finite_sup(symmetry_residual(f, x, y, z), interior, "symmetry")
    if boundary is not None and len(boundary):
        boundary = np.asarray(boundary, dtype=float).reshape(-1, 3)
        eps2 = max(eps2, _finite_sup(symmetry_residual(f, *boundary.T), boundary, "symmetry"))
    return EpsPair(eps1, eps2)


def measure_eps(f: EntropyFn, alpha: float, box: Box3) -> EpsPair:
    return measure_eps_points(f, alpha, box.points())


# The four steps of the reduction from three variables to one.
CHAIN_STEPS = ("reduction", "swap", "simplex", "fundamental")
CHAIN_COEFS = {"reduction": (1, 1), "swap": (1, 2), "simplex": (1, 2), "fundamental": (1, 4)}
CHAIN_LABELS = {
    "reduction": "chain:reduction:e1+e2",
    "swap": "chain:swap:e1+2e2",
    "simplex": "chain:simplex:e1+2e2",
    "fundamental": "chain:fundamental:e1+4e2",
}
# Bounds that follow from the triangle inequality step by step; the
# published swap step drops one eps1 and one eps2 term.
CHAIN_COEFS_RECOMPUTED = {"reduction": (1, 1), "swap": (2, 3), "simplex": (2, 3), "fundamental": (2, 5)}


@dataclass(frozen=True)
class ChainCheck:
    measured: float
    permitted: float

    @property
    def ok(self) -> bool:
        return self.measured <= self.permitted + 1e-12 + 1e-9 * self.permitted


@dataclass(frozen=True)
class ChainAudit:
    reduction: ChainCheck
    swap: ChainCheck
    simplex: ChainCheck
    fundamental: ChainCheck
    eps: EpsPair

    def items(self):
        return [(name, getattr(self, name)) for name in CHAIN_STEPS]

    @property
    def ok(self) -> bool:
        return all(c.ok for _, c in self.items())


def _F(f: EntropyFn) -> Callable:
    def F(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        return f(np.zeros(u.shape), u, v)

    return F


def _h(f: EntropyFn) -> Callable:
    F = _F(f)

    def h(t):
        t = np.asarray(t, dtype=float)
        return F(1 - t, t)

    return h


def chain_terms(f: EntropyFn, alpha: float, box: Box3, simplex: SimplexGrid) -> dict[str, np.ndarray]:
    """Signed values of the four intermediate expressions at every audit point."""
    F, h = _F(f), _h(f)
    x, y, z = box.points().T
    yz, xz = y + z, x + z
    swap_left = F(x, yz) + power_term(yz, alpha) * h(y / yz)
    reduction = f(x, y, z) - swap_left
    swap = swap_left - F(y, xz) - power_term(xz, alpha) * h(x / xz)

    sx, sy = simplex.array().T
    simplex_vals = (
        F(sx, 1 - sx)
        + power_term(1 - sx, alpha) * h(sy / (1 - sx))
        - F(sy, 1 - sy)
        - power_term(1 - sy, alpha) * h(sx / (1 - sy))
    )
    fundamental = np.asarray(fundamental_residual(h, alpha, sx, sy))
    return {"reduction": reduction, "swap": swap, "simplex": simplex_vals, "fundamental": fundamental}


def audit_points(box: Box3, simplex: SimplexGrid) -> tuple[np.ndarray, np.ndarray]:
    """Every interior and boundary triple the chain audit relies on."""
    x, y, z = box.points().T
    sx, sy = simplex.array().T
    sz = 1 - sx - sy
    interior = np.concatenate(
        [
            np.stack([x, y, z], 1),
            np.stack([y, x, z], 1),
            np.stack([sx, sy, sz], 1),
            np.stack([sy, sx, sz], 1),
        ]
    )

    def bnd(u, v):
        return np.stack([np.zeros_like(u), u, v], 1)

    yz, xz = y + z, x + z
    t1, t2 = y / yz, x / xz
    s1, s2 = sy / (1 - sx), sx / (1 - sy)
    boundary = np.concatenate(
        [
            bnd(x, yz),
            bnd(1 - t1, t1),
            bnd(t1, z / yz),
            bnd(y, xz),
            bnd(1 - t2, t2),
            bnd(t2, z / xz),
            bnd(sx, 1 - sx),
            bnd(sy, 1 - sy),
            bnd(1 - sx, sx),
            bnd(1 - sy, sy),
            bnd(1 - s1, s1),
            bnd(1 - s2, s2),
        ]
    )
    return interior, boundary


def measure_audit_eps(f: EntropyFn, alpha: float, box: Box3, simplex: SimplexGrid) -> EpsPair:
    """Hypothesis sups over the superset of points touched by :func:`audit_chain`."""
    interior, boundary = audit_points(box, simplex)
    return measure_eps_points(f, alpha, interior, boundary)


def audit_chain(f: EntropyFn, alpha: float, eps: EpsPair, box: Box3, simplex: SimplexGrid) -> ChainAudit:
    try:
        terms = chain_terms(f, alpha, box, simplex)
    except DomainError as exc:
        raise DomainError(f"chain audit: {exc}") from exc
    checks = {}
    for name in CHAIN_STEPS:
        c1, c2 = CHAIN_COEFS[name]
        pts = box.points() if name in ("reduction", "swap") else simplex.array()
        measured = _finite_sup(terms[name], pts, name)
        checks[name] = ChainCheck(measured, c1 * eps.eps1 + c2 * eps.eps2)
    return ChainAudit(eps=eps, **checks)
