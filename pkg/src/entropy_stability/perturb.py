"""Deterministic bounded noise fields.

Noise is a pure function of ``(seed, quantized coordinates)``, built from
SplitMix64 finalisers, so a perturbed candidate is a genuine function that
can be evaluated at the off-lattice points the entropy equation needs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Box3, EntropyFn, SolutionFamily, UsageError

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class NoiseMode(str, enum.Enum):
    GENERAL = "general"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class NoiseField:
    seed: int
    amplitude: float
    resolution: float
    mode: NoiseMode = NoiseMode.GENERAL

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise UsageError(f"amplitude must be >= 0, got {self.amplitude!r}")
        if not self.resolution > 0:
            raise UsageError(f"resolution must be > 0, got {self.resolution!r}")
        object.__setattr__(self, "mode", NoiseMode(self.mode))

    @classmethod
    def for_box(cls, seed: int, amplitude: float, box: Box3, mode=NoiseMode.GENERAL) -> "NoiseField":
        """Field quantized at a quarter of the box lattice step."""
        return cls(int(seed), float(amplitude), box.step / 4.0, mode)

    def cells(self, x, y, z) -> np.ndarray:
        coords = np.stack(np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z))))
        # cell centres sit on multiples of the resolution, so lattice points
        # never straddle a cell boundary; snapping first makes 1 - y/(y+z)
        # and z/(y+z) land in the same cell despite rounding
        q = np.floor(np.round(coords / self.resolution, 9) + 0.5).astype(np.int64)
        if self.mode is NoiseMode.SYMMETRIC:
            q = np.sort(q, axis=0)
        return q

    def values(self, x, y, z) -> np.ndarray:
        q = self.cells(x, y, z)
        if self.amplitude == 0:
            return np.zeros(q.shape[1:])
        with np.errstate(over="ignore"):
            h = np.full(q.shape[1:], _mix64(np.uint64(self.seed & _MASK) + _GAMMA), dtype=np.uint64)
            for k in range(3):
                h = _mix64((h ^ q[k].astype(np.uint64)) + _GAMMA)
            u = (h >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return self.amplitude * (2.0 * u - 1.0)


def noise_at(field: NoiseField, x: float, y: float, z: float) -> float:
    if x < 0 or y < 0 or z < 0:
        raise UsageError("noise coordinates must be nonnegative")
    return float(field.values(x, y, z))


def perturb(family: SolutionFamily, field: NoiseField, domain: Optional[Box3] = None) -> EntropyFn:
    return EntropyFn(family=family, noise=field, domain=domain)
