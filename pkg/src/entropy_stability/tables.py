"""Plain-text table formats and atomic file output.

Sum-function tables::

    # sum-function v1
    <s> <value>
    ...

Interval-function (instance) tables::

    # interval-fn2 v1
    # dom1 <lo> <hi> <step>
    # dom2 <lo> <hi> <step>
    <p> <q> <value>
    ...

Numbers are written in positional notation with 17 significant digits,
which round-trips every double exactly.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .core import DomainError, Interpolation, SumFunction, UsageError
from .glue import IntervalFn2, IntervalSpec

SUM_HEADER = "# sum-function v1"
FN2_HEADER = "# interval-fn2 v1"


class TableFormatError(UsageError):
    pass


def fmt(x: float) -> str:
    return np.format_float_positional(float(x), precision=17, unique=False, fractional=False, trim="-")


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_sum_function(phi: SumFunction) -> str:
    lines = [SUM_HEADER]
    lines += [f"{fmt(s)} {fmt(v)}" for s, v in zip(phi.knots, phi.values)]
    return "\n".join(lines) + "\n"


def _read_lines(path) -> list[str]:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise TableFormatError(f"cannot read {path}: {exc}") from exc


def _floats(line: str, count: int, path, lineno: int) -> list[float]:
    parts = line.split()
    if len(parts) != count:
        raise TableFormatError(f"{path}:{lineno}: expected {count} numbers, got {line!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise TableFormatError(f"{path}:{lineno}: not a number in {line!r}") from None


def load_sum_function(path, interpolation=Interpolation.NEAREST_BUCKET) -> SumFunction:
    lines = _read_lines(path)
    if not lines or lines[0].strip() != SUM_HEADER:
        raise TableFormatError(f"{path}: missing header {SUM_HEADER!r}")
    rows = [
        _floats(line, 2, path, i)
        for i, line in enumerate(lines[1:], start=2)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not rows:
        raise TableFormatError(f"{path}: no data rows")
    arr = np.array(rows)
    try:
        return SumFunction(arr[:, 0], arr[:, 1], interpolation)
    except UsageError as exc:
        raise TableFormatError(f"{path}: {exc}") from exc


def dump_interval_fn(fn: IntervalFn2) -> str:
    lines = [FN2_HEADER]
    for name, dom in (("dom1", fn.dom1), ("dom2", fn.dom2)):
        lines.append(f"# {name} {fmt(dom.lo)} {fmt(dom.hi)} {fmt(dom.step)}")
    p, q = fn.dom1.points(), fn.dom2.points()
    for i in range(fn.dom1.size):
        for j in range(fn.dom2.size):
            lines.append(f"{fmt(p[i])} {fmt(q[j])} {fmt(fn.table[i, j])}")
    return "\n".join(lines) + "\n"


def load_interval_fn(path) -> IntervalFn2:
    lines = _read_lines(path)
    if len(lines) < 3 or lines[0].strip() != FN2_HEADER:
        raise TableFormatError(f"{path}: missing header {FN2_HEADER!r}")
    doms = []
    for lineno, name in ((2, "dom1"), (3, "dom2")):
        parts = lines[lineno - 1].split()
        if len(parts) != 5 or parts[:2] != ["#", name]:
            raise TableFormatError(f"{path}:{lineno}: expected '# {name} <lo> <hi> <step>'")
        lo, hi, step = _floats(" ".join(parts[2:]), 3, path, lineno)
        try:
            doms.append(IntervalSpec(lo, hi, step))
        except UsageError as exc:
            raise TableFormatError(f"{path}:{lineno}: {exc}") from exc
    dom1, dom2 = doms
    table = np.full((dom1.size, dom2.size), np.nan)
    for lineno, line in enumerate(lines[3:], start=4):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        p, q, v = _floats(line, 3, path, lineno)
        try:
            table[dom1.index(p), dom2.index(q)] = v
        except DomainError as exc:
            raise TableFormatError(f"{path}:{lineno}: {exc}") from exc
    if np.any(np.isnan(table)):
        raise TableFormatError(f"{path}: table does not cover the whole lattice")
    try:
        return IntervalFn2(dom1, dom2, table)
    except UsageError as exc:
        raise TableFormatError(f"{path}: {exc}") from exc
