"""Experiment configuration and report assembly behind the CLI subcommands."""

from __future__ import annotations

import datetime as _dt
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import constants
from .core import (
    AlphaCase,
    Box3,
    EntropyFn,
    Regime,
    SimplexGrid,
    SolutionFamily,
    StabilityError,
    SumFunction,
    UsageError,
)
from .fit import FitReport, fit_h_const, fit_h_family, verdict
from .glue import GlueResult
from .perturb import NoiseField, NoiseMode, perturb
from .residuals import (
    CHAIN_COEFS_RECOMPUTED,
    CHAIN_LABELS,
    ChainAudit,
    EpsPair,
    audit_chain,
    measure_audit_eps,
)
from .tables import load_sum_function

REPORT_FORMAT = "entropy-stability-report v1"
SWEEP_COLUMNS = ("parameter", "value", "eps1", "eps2", "sup_error", "bound_value", "slack", "pass", "error")


@dataclass(frozen=True)
class ExperimentConfig:
    alpha: float = -1.0
    n: Optional[int] = None
    box_lo: Optional[float] = None
    box_hi: float = 4.0
    grid: int = 16
    a: float = 1.0
    phi: Optional[str] = None
    seed: int = 42
    amplitude: float = 1e-3
    noise_mode: str = "general"
    simplex: Optional[int] = None
    out: Optional[str] = None
    table_out: Optional[str] = None

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha == 1.0:
            raise UsageError(f"alpha must be finite and != 1, got {self.alpha!r}")
        if not (self.amplitude >= 0 and math.isfinite(self.amplitude)):
            raise UsageError(f"amplitude must be >= 0, got {self.amplitude!r}")
        if self.noise_mode not in {m.value for m in NoiseMode}:
            raise UsageError(f"noise mode must be general or symmetric, got {self.noise_mode!r}")
        if self.n is not None and (int(self.n) != self.n or self.n < 1):
            raise UsageError(f"n must be a positive integer, got {self.n!r}")

    @classmethod
    def merged(cls, file_values: Optional[dict] = None, flag_values: Optional[dict] = None) -> "ExperimentConfig":
        """Defaults, overridden by config-file entries, overridden by flags."""
        known = {f.name for f in fields(cls)}
        values: dict[str, Any] = {}
        for source in (file_values or {}, flag_values or {}):
            unknown = set(source) - known
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
            values.update({k: v for k, v in source.items() if v is not None})
        try:
            typed = {k: _coerce(k, v) for k, v in values.items()}
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad config value: {exc}") from exc
        return cls(**typed)

    @property
    def case(self) -> AlphaCase:
        return AlphaCase.from_alpha(self.alpha)

    @property
    def box(self) -> Box3:
        if self.box_lo is None:
            return Box3.default(self.box_hi, self.grid)
        return Box3(self.box_lo, self.box_hi, self.grid)

    @property
    def bound_n(self) -> Optional[int]:
        """Box index of the bound; defaults to ceil(box_hi) when alpha > 0."""
        if self.case.regime is Regime.POSITIVE_NOT_ONE:
            return int(self.n) if self.n is not None else max(1, math.ceil(self.box_hi - 1e-12))
        return self.n

    @property
    def simplex_grid(self) -> SimplexGrid:
        return SimplexGrid(self.simplex if self.simplex is not None else max(3, self.grid))

    def family(self) -> SolutionFamily:
        box = self.box
        lo, hi = min(3 * box.lo, 1.0), max(3 * box.n, 1.0)
        if self.phi is None:
            return SolutionFamily.exact(self.a, self.alpha, lo, hi)
        try:
            value = float(self.phi)
        except ValueError:
            return SolutionFamily(self.a, self.alpha, load_sum_function(self.phi))
        return SolutionFamily(self.a, self.alpha, SumFunction.constant(value, lo, hi))

    def candidate(self) -> EntropyFn:
        field = NoiseField.for_box(self.seed, self.amplitude, self.box, self.noise_mode)
        return perturb(self.family(), field, self.box)


_INT_KEYS = {"n", "grid", "seed", "simplex"}
_FLOAT_KEYS = {"alpha", "box_lo", "box_hi", "a", "amplitude"}


def _coerce(key: str, value):
    if key in _INT_KEYS:
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"{key} must be an integer, got {value!r}")
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    return str(value)


def load_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


# ------------------------------------------------------------------ reports


def _num(value: float, ref: str) -> dict:
    return {"value": float(value), "ref": ref}


def eps_section(eps: EpsPair) -> dict:
    return {
        "eps1": _num(eps.eps1, "hypothesis:entropy-equation:eps1"),
        "eps2": _num(eps.eps2, "hypothesis:permutation-symmetry:eps2"),
    }


def audit_section(audit: ChainAudit) -> dict:
    steps = {}
    for name, check in audit.items():
        c1, c2 = CHAIN_COEFS_RECOMPUTED[name]
        steps[name] = {
            "ref": CHAIN_LABELS[name],
            "measured": check.measured,
            "permitted": check.permitted,
            "ok": check.ok,
            "triangle_bound": c1 * audit.eps.eps1 + c2 * audit.eps.eps2,
        }
    return {"eps": eps_section(audit.eps), "steps": steps, "ok": audit.ok}


def fit_section(report: FitReport) -> dict:
    bound = report.bound
    out = {
        "best_a": _num(report.best_a, "fit:a"),
        "sup_error": _num(report.sup_error, "fit:sup|f-(a*powersum+phi(sum))|"),
        "phi_knots": int(report.phi.knots.size),
        "phi_span": list(report.phi.span),
    }
    if bound is not None:
        out["bound"] = {
            "ref": bound.label,
            "n": bound.n,
            "coef_eps1": bound.coef_eps1,
            "coef_eps2": bound.coef_eps2,
            "value": report.bound_value,
            "slack": report.slack,
        }
        if bound.case.regime is Regime.ZERO:
            c1, c2 = constants.ZERO_REGIME_RECOMPUTED
            value = c1 * report.eps.eps1 + c2 * report.eps.eps2
            out["bound"]["recomputed"] = {
                "ref": "stability:zero:191e1+759e2",
                "value": value,
                "slack": value - report.sup_error,
            }
    return out


def h_section(f: EntropyFn, case: AlphaCase, simplex: SimplexGrid, audit: ChainAudit) -> dict:
    """Fit of the one-variable trace ``h(t) = f(0, 1-t, t)``."""
    m = simplex.m
    t = np.arange(1, m) / m
    h = f(np.zeros_like(t), 1 - t, t)
    eps_fund = audit.fundamental.measured
    if case.regime is Regime.ZERO:
        c, err = fit_h_const(h)
        bound = 63.0 * (audit.eps.eps1 + 4.0 * audit.eps.eps2)
        return {
            "form": "c",
            "c": c,
            "sup_error": _num(err, "h-fit:stable:sup|h-c|"),
            "bound": _num(bound, "h-fit:stable:63(e1+4e2)"),
            "ok": err <= bound + 1e-9 * (1 + bound),
        }
    hf = fit_h_family(t, h, case.alpha)
    out = {
        "form": "a*t^alpha + b*((1-t)^alpha - 1)",
        "a": hf.a,
        "b": hf.b,
        "sup_error": _num(hf.sup_error, "h-fit:sup|h-family|"),
        "fundamental_eps": _num(eps_fund, "h-fit:measured-fundamental-residual"),
    }
    if case.regime is Regime.POSITIVE_NOT_ONE:
        bound = constants.K(case.alpha) * eps_fund
        out["bound"] = _num(bound, "h-fit:superstable:K(alpha)*eps")
        out["ok"] = hf.sup_error <= bound + 1e-9 * (1 + bound)
    return out


def timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()


def run_verify(cfg: ExperimentConfig) -> dict:
    case = cfg.case
    box = cfg.box
    n = cfg.bound_n
    f = cfg.candidate()
    report = verdict(f, cfg.alpha, box, n)
    simplex = cfg.simplex_grid
    audit = audit_chain(f, cfg.alpha, measure_audit_eps(f, cfg.alpha, box, simplex), box, simplex)
    config = {k: v for k, v in asdict(cfg).items() if k not in ("out", "table_out")}
    config.update({"n": n, "box_lo": box.lo, "simplex": simplex.m})
    doc = {
        "format": REPORT_FORMAT,
        "generated_at": timestamp(),
        "command": "verify",
        "config": config,
        "regime": case.regime.value,
        "eps": eps_section(report.eps),
        "fit": fit_section(report),
        "chain_audit": audit_section(audit),
        "h_fit": h_section(f, case, simplex, audit),
        "verdict": {"pass": bool(report.passed), "ref": report.bound.label},
    }
    return {"document": doc, "report": report}


def glue_document(result: GlueResult, a_path: str, b_path: str) -> dict:
    return {
        "format": REPORT_FORMAT,
        "generated_at": timestamp(),
        "command": "glue",
        "inputs": {"A": str(a_path), "B": str(b_path)},
        "eps": _num(result.eps, "hypothesis:near-associativity:eps"),
        "domain": {"lo": result.domain.lo, "hi": result.domain.hi, "step": result.domain.step},
        "cover": [list(w) for w in result.cover],
        "dev_A": {**_num(result.dev_A, "glue:sup|A(p,q)-phi(p+q)|<=2eps"), "worst": list(result.worst_A), "ok": result.ok_A},
        "dev_B": {**_num(result.dev_B, "glue:sup|B(t,s)-phi(t+s)|<=eps"), "worst": list(result.worst_B), "ok": result.ok_B},
        "pass": result.ok,
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def sweep_rows(cfg: ExperimentConfig, vary: str, values) -> list[dict]:
    if vary not in ("amplitude", "n", "alpha"):
        raise UsageError(f"cannot vary {vary!r}; choose amplitude, n or alpha")
    rows = []
    for v in values:
        row = {"parameter": vary, "value": v}
        try:
            if vary == "alpha":
                sub = replace(cfg, alpha=float(v), n=None if float(v) <= 0 else cfg.n)
            else:
                sub = replace(cfg, **{vary: _coerce(vary, v)})
            rep = verdict(sub.candidate(), sub.alpha, sub.box, sub.bound_n)
            row.update(
                eps1=rep.eps.eps1,
                eps2=rep.eps.eps2,
                sup_error=rep.sup_error,
                bound_value=rep.bound_value,
                slack=rep.slack,
                **{"pass": bool(rep.passed), "error": ""},
            )
        except (StabilityError, ArithmeticError, ValueError) as exc:
            row.update({"pass": False, "error": str(exc)})
        rows.append(row)
    return rows


def sweep_csv(rows: list[dict]) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n", restval="")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_value(row.get(k, "")) for k in SWEEP_COLUMNS})
    return buf.getvalue()


def _csv_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def schema_path() -> Path:
    return Path(__file__).with_name("schemas") / "report.schema.json"
