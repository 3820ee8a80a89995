import math
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deeponet_rates import InputError, ParameterError
from deeponet_rates._errors import EvaluationError
from deeponet_rates.harness import (
    CSV_HEADER,
    CellResult,
    ConvergenceReport,
    SweepError,
    SweepSpec,
    fit_slope,
    format_float,
    gnuplot_script,
    run_sweep,
    write_atomic,
)


def power_cell(rate, c=1.0):
    def cell(params, axis, value, seed):
        e = c * float(value) ** rate
        return CellResult(e, 0.5 * e, float(value), seed)
    return cell


# ---------------------------------------------------------------- slopes

def test_slope_identity():
    slope, r2 = fit_slope([(1, 1), (2, 2), (4, 4)])
    assert slope == pytest.approx(1.0, abs=1e-14)
    assert r2 == pytest.approx(1.0, abs=1e-14)


def test_slope_inverse():
    slope, r2 = fit_slope([(1, 1), (2, 0.5), (4, 0.25)])
    assert slope == pytest.approx(-1.0, abs=1e-14)
    assert r2 == pytest.approx(1.0, abs=1e-14)


def test_slope_halving_errors():
    h = 0.1
    slope, _ = fit_slope([(h, h), (h / 2, h / 2), (h / 4, h / 4)])
    assert abs(slope - 1.0) <= 1e-12


def test_slope_noisy_seeded():
    rng = np.random.default_rng(0)
    x = 2.0 ** np.arange(1, 9)
    y = 3.0 * x**-2.0 * (1 + 0.05 * rng.standard_normal(x.size))
    slope, r2 = fit_slope(np.column_stack([x, y]))
    assert abs(slope + 2.0) <= 0.1
    assert r2 > 0.99


@pytest.mark.parametrize("pairs", [
    [(1, 1), (2, 2)],
    [(1, 1), (2, 0), (4, 1)],
    [(1, 1), (-2, 1), (4, 1)],
    [(1, 1), (2, math.nan), (4, 1)],
    [(1, 1, 1), (2, 2, 2), (3, 3, 3)],
])
def test_slope_rejects(pairs):
    with pytest.raises(InputError):
        fit_slope(pairs)


@given(st.floats(-3, 3), st.floats(0.01, 100))
def test_slope_recovers_power_law(rate, c):
    x = np.array([2.0, 4.0, 8.0, 16.0])
    slope, _ = fit_slope(np.column_stack([x, c * x**rate]))
    assert slope == pytest.approx(rate, abs=1e-9)


# ------------------------------------------------------------- formatting

@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_float_round_trip(v):
    assert float(format_float(v)) == v


@given(st.integers(-10**12, 10**12))
def test_format_int_stays_int(n):
    assert format_float(n) == str(n)
    assert format_float(np.int64(n)) == str(n)


def test_format_float_integral_float():
    assert format_float(2.0) == "2.0"
    assert format_float(math.nan) == "nan"


# ------------------------------------------------------------------ specs

def test_spec_validation():
    with pytest.raises(ParameterError):
        SweepSpec("burgers1d", "m", [16, 32])
    with pytest.raises(ParameterError):
        SweepSpec("burgers1d", "m", [16, 64, 32])
    with pytest.raises(ParameterError):
        SweepSpec("burgers1d", "m", [16, 16, 32])
    with pytest.raises(ParameterError):
        SweepSpec("burgers1d", "q", [16, 32, 64])
    assert SweepSpec("burgers1d", "m", (16, 32, 64)).values == [16, 32, 64]


def test_unknown_sweep_axis_for_problem():
    spec = SweepSpec("bochner-riesz", "m", [4, 8, 16])
    with pytest.raises(InputError, match="no 'm' sweep"):
        run_sweep(spec)


# ---------------------------------------------------------------- reports

def test_csv_layout(tmp_path):
    out = tmp_path / "r.csv"
    spec = SweepSpec("demo", "m", [4, 8, 16], seed=7, out=str(out))
    rep = run_sweep(spec, cell=power_cell(-1.0))
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 4
    assert lines[1] == "m,4,0.25,0.125,0,4.0,7.0"
    assert all(len(line.split(",")) == 7 for line in lines)
    assert rep.slope()[0] == pytest.approx(-1.0, abs=1e-12)
    assert rep.slope("error_l2")[0] == pytest.approx(-1.0, abs=1e-12)
    np.testing.assert_array_equal(rep.values, [4, 8, 16])
    np.testing.assert_array_equal(rep.column("aux1"), [4, 8, 16])


def test_timing_column(tmp_path):
    rep = run_sweep(SweepSpec("demo", "p", [1, 2, 3], timing=True), cell=power_cell(1.0))
    assert np.all(rep.column("runtime_ms") >= 0)
    rep = run_sweep(SweepSpec("demo", "p", [1, 2, 3]), cell=power_cell(1.0))
    np.testing.assert_array_equal(rep.column("runtime_ms"), 0)


def test_slope_with_abscissa():
    rep = run_sweep(SweepSpec("demo", "m", [4, 8, 16]), cell=power_cell(-2.0))
    slope, _ = rep.slope(abscissa=1.0 / rep.values)
    assert slope == pytest.approx(2.0, abs=1e-12)


def test_slope_undefined_on_zero_errors():
    rep = ConvergenceReport("m", [(1, 0.0, 0.0, 0, 0, 0)] * 3)
    with pytest.raises(InputError):
        rep.slope()


def test_failing_cell_leaves_no_file(tmp_path):
    out = tmp_path / "r.csv"

    def cell(params, axis, value, seed):
        if value == 8:
            raise EvaluationError("boom")
        return CellResult(1.0, 1.0)

    with pytest.raises(SweepError, match="m=8") as info:
        run_sweep(SweepSpec("demo", "m", [4, 8, 16], out=str(out)), cell=cell)
    assert info.value.exit_code == 4
    assert isinstance(info.value.cause, EvaluationError)
    assert os.listdir(tmp_path) == []


def test_failing_cell_keeps_previous_file(tmp_path):
    out = tmp_path / "r.csv"
    out.write_text("old\n")

    def cell(params, axis, value, seed):
        raise ParameterError("bad")

    with pytest.raises(SweepError) as info:
        run_sweep(SweepSpec("demo", "m", [4, 8, 16], out=str(out)), cell=cell)
    assert info.value.exit_code == 3
    assert out.read_text() == "old\n"
    assert os.listdir(tmp_path) == ["r.csv"]


def test_write_atomic_cleans_up(tmp_path):
    target = tmp_path / "sub" / "x.txt"
    write_atomic(str(target), "abc")
    assert target.read_text() == "abc"
    with pytest.raises(TypeError):
        write_atomic(str(target), 123)
    assert target.read_text() == "abc"
    assert os.listdir(target.parent) == ["x.txt"]


def test_threads_do_not_change_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    vals = [4, 8, 16, 32, 64]
    run_sweep(SweepSpec("demo", "m", vals, out=str(a)), cell=power_cell(-1.5, 3.0), threads=1)
    run_sweep(SweepSpec("demo", "m", vals, out=str(b)), cell=power_cell(-1.5, 3.0), threads=4)
    assert a.read_bytes() == b.read_bytes()


def test_registry_sweep_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path, threads in ((a, 1), (b, 3)):
        rep = run_sweep(SweepSpec("burgers1d", "m", [16, 32, 64], out=str(path)), threads=threads)
    assert a.read_bytes() == b.read_bytes()
    slope, r2 = rep.slope()
    assert -1.25 < slope < -0.85
    assert r2 > 0.99


def test_gnuplot_script():
    s = gnuplot_script("out/r.csv", "burgers1d vs m", column=4)
    assert "set logscale xy" in s
    assert "set datafile separator ','" in s
    assert "'out/r.csv'" in s
    assert "using 2:4" in s
    assert "burgers1d vs m" in s
