"""Closed-form stability constants and the bound lookup table."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .core import AlphaCase, Regime, StabilityError, UsageError


class RegimeError(StabilityError, ValueError):
    """A constant was requested outside the exponent range where it is defined."""


class SingularityError(RegimeError):
    """The constant's formula divides by zero at this exponent."""


def _require_positive_regime(alpha: float) -> float:
    alpha = float(alpha)
    if alpha in (0.0, 1.0):
        raise SingularityError(f"K(alpha) is singular at alpha={alpha:g}")
    if not alpha > 0:
        raise RegimeError(f"K(alpha) needs alpha > 0, got {alpha:g}")
    return alpha


def K(alpha: float) -> float:
    """Superstability constant of the parametric fundamental equation."""
    alpha = _require_positive_regime(alpha)
    d1 = abs(2.0 ** (1.0 - alpha) - 1.0)
    d2 = abs(2.0 ** (-alpha) - 1.0)
    if d1 == 0.0 or d2 == 0.0:
        raise SingularityError(f"K(alpha) is singular at alpha={alpha!r}")
    value = (3.0 + 12.0 * 2.0**alpha + 32.0 * 3.0 ** (alpha + 1.0) / d2) / d1
    if not math.isfinite(value):
        raise SingularityError(f"K(alpha) overflows at alpha={alpha!r}")
    return value


def _check_n(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise UsageError(f"n must be a positive integer, got {n!r}")
    return int(n)


def c_n(alpha: float, n: int) -> float:
    """Coefficient of eps1 in the box-restricted bound for alpha > 0."""
    n = _check_n(n)
    return 2.0 + 7.0 * 2.0**alpha * float(n) ** alpha * K(alpha)


def d_n(alpha: float, n: int) -> float:
    """Coefficient of eps2 in the box-restricted bound for alpha > 0."""
    n = _check_n(n)
    return 4.0 + 7.0 * 2.0 ** (alpha + 2.0) * float(n) ** alpha * K(alpha)


@dataclass(frozen=True)
class BoundSpec:
    case: AlphaCase
    n: Optional[int]
    coef_eps1: float
    coef_eps2: float

    @property
    def label(self) -> str:
        if self.case.regime is Regime.NEGATIVE:
            return "stability:neg:2e1+3e2"
        if self.case.regime is Regime.ZERO:
            return "stability:zero:191e1+1263e2"
        return f"stability:pos:c{self.n}e1+d{self.n}e2"

    def value(self, eps1: float, eps2: float) -> float:
        return self.coef_eps1 * eps1 + self.coef_eps2 * eps2


# The alpha = 0 chain recomputed term by term gives 127e1 + 506e2 for the
# intermediate H-bound instead of 127e1 + 1010e2, hence 191e1 + 759e2 overall.
ZERO_REGIME_RECOMPUTED = (191.0, 759.0)


def bound_for(case: AlphaCase, n: Optional[int] = None) -> BoundSpec:
    if case.regime is Regime.POSITIVE_NOT_ONE:
        if n is None:
            raise UsageError("n is required when alpha > 0")
        n = _check_n(n)
        return BoundSpec(case, n, c_n(case.alpha, n), d_n(case.alpha, n))
    if n is not None:
        raise UsageError(f"n is only meaningful when alpha > 0 (got n={n!r} for alpha={case.alpha:g})")
    if case.regime is Regime.NEGATIVE:
        return BoundSpec(case, None, 2.0, 3.0)
    return BoundSpec(case, None, 191.0, 1263.0)


def _pairs(pairs: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    pairs = list(pairs)
    if not pairs:
        raise UsageError("empty pair list")
    return pairs


def check_multiplicative(mu: Callable[[float], float], pairs) -> float:
    """``max |mu(xy) - mu(x) mu(y)|`` over the given pairs."""
    return max(abs(mu(x * y) - mu(x) * mu(y)) for x, y in _pairs(pairs))


def check_logarithmic(l: Callable[[float], float], pairs) -> float:
    """``max |l(xy) - l(x) - l(y)|`` over the given pairs."""
    return max(abs(l(x * y) - l(x) - l(y)) for x, y in _pairs(pairs))
