"""Parameter sweeps, log-log slope fits and CSV reports."""
from __future__ import annotations

import io
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from ._errors import DeepONetRatesError, InputError, ParameterError

CSV_HEADER = "axis,value,error_linf,error_l2,runtime_ms,aux1,aux2"
AXES = ("m", "p", "theta_size", "N_paths", "R")


def fit_slope(pairs):
    """Least-squares slope of ``ln(error)`` against ``ln(axis)``.

    Returns ``(slope, r_squared)``.
    """
    pts = np.asarray(pairs, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise InputError("need at least 3 (axis, error) pairs")
    if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
        raise InputError("slope fits need finite positive axis values and errors")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def format_float(v) -> str:
    """Shortest round-trip decimal; integers stay integers."""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


class CellResult(NamedTuple):
    error_linf: float
    error_l2: float
    aux1: float = math.nan
    aux2: float = math.nan


@dataclass
class SweepSpec:
    """One sweep: a problem, an axis and at least three increasing values.

    ``timing`` switches the ``runtime_ms`` column on; it is off by default so
    that reports are byte-identical across repeated runs.
    """

    problem: str
    axis: str
    values: list
    fixed: dict = field(default_factory=dict)
    seed: int = 0
    out: Optional[str] = None
    timing: bool = False

    def __post_init__(self):
        if self.axis not in AXES:
            raise ParameterError(f"axis must be one of {AXES}")
        v = list(self.values)
        if len(v) < 3:
            raise ParameterError("a sweep needs at least 3 axis values")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ParameterError("sweep values must be strictly increasing")
        self.values = v


@dataclass
class ConvergenceReport:
    axis: str
    rows: List[tuple]
    problem: str = ""

    def column(self, name):
        idx = CSV_HEADER.split(",").index(name) - 1
        return np.array([r[idx] for r in self.rows], dtype=float)

    @property
    def values(self):
        return self.column("value")

    def slope(self, column="error_linf", abscissa=None):
        """``(slope, r_squared)`` of ``column`` against the axis (or ``abscissa``)."""
        x = self.values if abscissa is None else np.asarray(abscissa, float)
        y = self.column(column)
        if np.any(y <= 0):
            raise InputError(f"slope undefined: {column} has non-positive entries")
        return fit_slope(np.column_stack([x, y]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in self.rows:
            buf.write(",".join([self.axis] + [format_float(v) for v in r]) + "\n")
        return buf.getvalue()


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".sweep-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class SweepError(DeepONetRatesError):
    """A sweep cell failed; wraps the original error with the cell coordinates."""

    def __init__(self, spec, value, cause):
        super().__init__(f"{spec.problem} sweep failed at {spec.axis}={value}: {cause}")
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)


def run_sweep(spec: SweepSpec, cell: Optional[Callable] = None, threads=1) -> ConvergenceReport:
    """Evaluate every cell and write the CSV (if ``spec.out``) atomically.

    ``cell(params, axis, value, seed)`` returns a :class:`CellResult`; by
    default it is looked up in the problem registry.  Cells are independent
    and may run on a thread pool; rows keep the axis order.
    """
    if cell is None:
        from .problems import sweep_cell
        cell = sweep_cell(spec.problem, spec.axis)

    def one(value):
        t0 = time.perf_counter()
        try:
            res = cell(dict(spec.fixed), spec.axis, value, spec.seed)
        except Exception as exc:  # noqa: BLE001
            raise SweepError(spec, value, exc) from exc
        ms = (time.perf_counter() - t0) * 1e3 if spec.timing else 0
        return (value, float(res.error_linf), float(res.error_l2), ms,
                float(res.aux1), float(res.aux2))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            rows = list(pool.map(one, spec.values))
    else:
        rows = [one(v) for v in spec.values]
    report = ConvergenceReport(spec.axis, rows, spec.problem)
    if spec.out:
        write_atomic(spec.out, report.to_csv())
    return report


def gnuplot_script(csv_path, title="", column=3) -> str:
    """Plain-text gnuplot script plotting ``column`` of ``csv_path`` on log axes."""
    return (
        "set datafile separator ','\n"
        "set logscale xy\n"
        f"set title '{title}'\n"
        "set xlabel 'value'\nset ylabel 'error'\n"
        f"plot '{csv_path}' every ::1 using 2:{column} with linespoints title 'error'\n"
    )
