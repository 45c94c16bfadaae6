"""Command-line front end.

Exit codes: 0 all checks pass, 1 a bound is violated, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import constants
from .core import StabilityError, UsageError
from .experiment import (
    ExperimentConfig,
    dumps,
    glue_document,
    load_config_file,
    run_verify,
    sweep_csv,
    sweep_rows,
)
from .glue import HypothesisViolation, build_phi, infer_intervals
from .tables import atomic_write, dump_sum_function, fmt, load_interval_fn

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

_D = ExperimentConfig()
_CONFIG_FLAGS = (
    ("--alpha", float, f"exponent alpha != 1 (default: {_D.alpha})"),
    ("--n", int, "box index of the alpha > 0 bound (default: ceil(box-hi) when alpha > 0, unused otherwise)"),
    ("--box-lo", float, "lower clip of the sampling box (default: box-hi / grid)"),
    ("--box-hi", float, f"upper edge of the sampling box (default: {_D.box_hi})"),
    ("--grid", int, f"lattice points per axis (default: {_D.grid})"),
    ("--a", float, f"power-sum coefficient of the exact family (default: {_D.a})"),
    ("--phi", str, "sum-function: a constant or a sum-function table file (default: closure constant -a)"),
    ("--seed", int, f"noise seed (default: {_D.seed})"),
    ("--amplitude", float, f"noise amplitude (default: {_D.amplitude})"),
    ("--noise-mode", str, f"general or symmetric (default: {_D.noise_mode})"),
    ("--simplex", int, "subdivisions of the simplex audit grid (default: grid)"),
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of option values; flags override it")
    for flag, typ, help_ in _CONFIG_FLAGS:
        p.add_argument(flag, type=typ, default=None, help=help_)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entropy-stability", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("constants", help="print K(alpha), c_n and d_n as CSV")
    p.add_argument("--alpha", type=float, required=True, help="exponent, alpha > 0 and != 1")
    p.add_argument("--n", type=int, default=10, help="largest box index n_max (default: 10)")
    p.add_argument("--out", help="write the CSV here instead of stdout")

    p = sub.add_parser("verify", help="measure eps, fit, audit and check the stability bound")
    _add_config_flags(p)
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--table-out", help="write the fitted sum-function table here")

    p = sub.add_parser("glue", help="build phi from near-associative tables A and B")
    p.add_argument("--A", dest="a_table", required=True, help="interval-fn2 table of A on (U+V) x W")
    p.add_argument("--B", dest="b_table", required=True, help="interval-fn2 table of B on U x (V+W)")
    p.add_argument("--eps", type=float, default=None, help="hypothesis eps (default: measured sup)")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--table-out", help="write phi as a sum-function table here")

    p = sub.add_parser("sweep", help="one verdict per parameter value, as CSV")
    _add_config_flags(p)
    p.add_argument("--vary", required=True, choices=("amplitude", "n", "alpha"), help="parameter to vary")
    p.add_argument("--values", default="", help="comma-separated values (default: none, header-only CSV)")
    p.add_argument("--out", help="CSV path (default: stdout)")
    return parser


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)


def _config(args) -> ExperimentConfig:
    file_values = load_config_file(args.config) if args.config else {}
    flags = {flag[2:].replace("-", "_"): getattr(args, flag[2:].replace("-", "_")) for flag, _, _ in _CONFIG_FLAGS}
    return ExperimentConfig.merged(file_values, flags)


def cmd_constants(args) -> int:
    k = constants.K(args.alpha)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    lines = [f"# K(alpha)={fmt(k)} alpha={fmt(args.alpha)}", "n,c_n,d_n"]
    for n in range(1, args.n + 1):
        lines.append(f"{n},{fmt(constants.c_n(args.alpha, n))},{fmt(constants.d_n(args.alpha, n))}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args)
    result = run_verify(cfg)
    _emit(dumps(result["document"]), args.out)
    if args.table_out:
        atomic_write(args.table_out, dump_sum_function(result["report"].phi))
    if not result["report"].passed:
        rep = result["report"]
        print(
            f"bound violated: sup error {rep.sup_error:.17g} > {rep.bound.label} = {rep.bound_value:.17g}",
            file=sys.stderr,
        )
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_glue(args) -> int:
    A = load_interval_fn(args.a_table)
    B = load_interval_fn(args.b_table)
    U, V, W = infer_intervals(A, B)
    try:
        result = build_phi(A, B, U, V, W, args.eps)
    except HypothesisViolation as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    _emit(dumps(glue_document(result, args.a_table, args.b_table)), args.out)
    if args.table_out:
        atomic_write(args.table_out, dump_sum_function(result.as_sum_function()))
    if not result.ok:
        if not result.ok_A:
            print(f"|A - phi| = {result.dev_A:.17g} > 2 eps at (p, q) = {result.worst_A}", file=sys.stderr)
        if not result.ok_B:
            print(f"|B - phi| = {result.dev_B:.17g} > eps at (t, s) = {result.worst_B}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    rows = sweep_rows(cfg, args.vary, values)
    _emit(sweep_csv(rows), args.out)
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_VIOLATION


COMMANDS = {"constants": cmd_constants, "verify": cmd_verify, "glue": cmd_glue, "sweep": cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (StabilityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
