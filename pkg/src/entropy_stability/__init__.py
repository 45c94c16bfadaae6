"""Numerical verification of Hyers-Ulam stability for the modified entropy equation
``f(x,y,z) = f(x,y+z,0) + (y+z)**alpha * f(0, y/(y+z), z/(y+z))``."""

from .constants import BoundSpec, K, bound_for, c_n, check_logarithmic, check_multiplicative, d_n
from .core import (
    AlphaCase,
    Box3,
    DomainError,
    EntropyFn,
    Regime,
    SimplexGrid,
    SolutionFamily,
    StabilityError,
    SumFunction,
    UsageError,
    eval_entropy_fn,
    power_term,
    sup_over,
)
from .fit import FitReport, brute_force_fit, fit_family, fit_h_const, fit_h_family, verdict
from .glue import IntervalFn2, IntervalSpec, build_phi, cover_W, extend_phi_nested
from .perturb import NoiseField, noise_at, perturb
from .residuals import (
    ChainAudit,
    EpsPair,
    assoc_residual,
    audit_chain,
    entropy_residual,
    fundamental_residual,
    measure_eps,
    symmetry_residual,
)

__version__ = "0.1.0"
