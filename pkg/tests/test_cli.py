import subprocess
import sys

import numpy as np
import pytest

from deeponet_rates.burgers import spectral_reference
from deeponet_rates.cli import main, read_config
from deeponet_rates.deeponet import read_manifest
from deeponet_rates.fd_cascade import load_matrix
from deeponet_rates.harness import CSV_HEADER
from deeponet_rates.relu.network import load


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def fields(line):
    parts = line.split()
    return parts[0], {k: v for k, v in (p.split("=", 1) for p in parts[1:])}


def test_advdiff_constant_speed(capsys):
    code, out, _ = run(capsys, "advdiff1d", "--a-const", "0", "--f-const", "1", "--L", "1",
                       "--m", "64", "--x", "0.5")
    assert code == 0
    pid, f = fields(out.strip())
    assert pid == "advdiff1d"
    assert abs(float(f["discrete"]) - 0.125) <= 1e-12
    assert abs(float(f["exact"]) - 0.125) <= 1e-12


def test_reacdiff_dense_gap(capsys):
    code, out, _ = run(capsys, "reacdiff2d", "--grid", "10", "--a3-const", "1", "--oracle", "dense")
    assert code == 0
    _, f = fields(out.strip())
    assert int(f["unknowns"]) == 81
    assert float(f["gap"]) <= 1e-9


def test_burgers_against_spectral(capsys):
    code, out, _ = run(capsys, "burgers1d", "--m", "128", "--kappa", "0.5", "--t", "0.25",
                       "--x", "0.5")
    assert code == 0
    _, f = fields(out.strip())
    ref = float(spectral_reference(np.sin, 0.5, 0.5, 0.25))
    assert abs(float(f["rational"]) - ref) <= 1e-2
    assert float(f["spectral"]) == pytest.approx(ref, abs=1e-12)


def test_out_writes_key_value_csv(capsys, tmp_path):
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "--out", str(out), "advdiff1d", "--a-const", "0", "--f-const", "1")
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "key,value"
    assert dict(ln.split(",") for ln in lines[1:])["exact"] == "0.125"


@pytest.mark.parametrize("argv", [
    ["burgers1d", "--bogus", "1"],
    ["burgers1d", "--kappa"],
    ["burgers1d", "stray"],
    ["sweep", "burgers1d", "--axis", "m", "--values", "a,b,c"],
    ["acceptance", "--extra", "1"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_argparse_errors_exit_2():
    for argv in (["nope"], ["sweep", "burgers1d", "--axis", "m"], []):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2


def test_validation_error_exit_3(capsys):
    code, _, err = run(capsys, "burgers1d", "--kappa", "1e-4")
    assert code == 3
    assert "ParameterError" in err


def test_numerical_error_exit_4(capsys):
    code, _, err = run(capsys, "burgers1d", "--linearized", "true", "--m", "4", "--kappa", "0.01")
    assert code == 4
    assert "Cole-Hopf" in err


def test_sweep_error_exit_code_from_cause(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "--out", str(out), "sweep", "burgers1d", "--axis", "m",
                     "--values", "4,8,16", "--kappa", "1e-4")
    assert code == 3
    assert not out.exists()


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text("# advection-diffusion\na-const = 0\nf_const = 1  # forcing\nx = 0.25\n")
    assert read_config(cfg) == {"a_const": "0", "f_const": "1", "x": "0.25"}
    code, out, _ = run(capsys, "--config", str(cfg), "advdiff1d")
    assert code == 0
    assert float(fields(out)[1]["exact"]) == pytest.approx(0.25 * 0.75 / 2, abs=1e-12)
    code, out, _ = run(capsys, "--config", str(cfg), "advdiff1d", "--x", "0.5")
    assert code == 0
    assert float(fields(out)[1]["exact"]) == pytest.approx(0.125, abs=1e-12)


def test_bad_config_line(capsys, tmp_path):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("m 16\n")
    code, _, err = run(capsys, "--config", str(cfg), "burgers1d")
    assert code == 2
    assert "key = value" in err


def test_missing_config_file(capsys, tmp_path):
    code, _, _ = run(capsys, "--config", str(tmp_path / "none.conf"), "burgers1d")
    assert code == 2


def test_sweep_csv_is_deterministic(capsys, tmp_path):
    a, b, gp = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "plot.gp"
    argv = ["sweep", "burgers1d", "--axis", "m", "--values", "16,32,64"]
    assert main(["--out", str(a)] + argv + ["--gnuplot", str(gp)]) == 0
    assert main(["--out", str(b), "--threads", "3"] + argv) == 0
    err = capsys.readouterr().err
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == CSV_HEADER
    assert "slope" in err
    assert str(a) in gp.read_text()


def test_sweep_to_stdout(capsys):
    code, out, _ = run(capsys, "sweep", "advdiff1d", "--axis", "m", "--values", "8,16,32")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == CSV_HEADER
    assert [ln.split(",")[1] for ln in lines[1:]] == ["8", "16", "32"]


def test_dump_matrix(capsys, tmp_path):
    path = tmp_path / "m.txt"
    code, _, _ = run(capsys, "reacdiff2d", "--grid", "4", "--a3-const", "1", "--dump", str(path))
    assert code == 0
    M = load_matrix(path, (9, 9))
    h = 0.25
    assert M[0, 0] == pytest.approx(4 + h * h)
    assert M[0, 1] == -1.0
    np.testing.assert_array_equal(M, M.T)


def test_dump_relu_network(capsys, tmp_path):
    path = tmp_path / "net.relu"
    code, _, _ = run(capsys, "relu-audit", "--samples", "1000", "--dump", str(path))
    assert code == 0
    assert path.read_text().startswith("relu-net v1 ")
    net = load(path)
    x = np.array([[0.005, 1.0, -1.5, 0.5, 2.0]])
    exact = 1.0 - 0.005 * 0.5 * 2.0 / (1 + 0.005 * -1.5)
    assert abs(float(net(x)[0, 0]) - exact) <= 1e-4


def test_manifest(capsys, tmp_path):
    code, out, _ = run(capsys, "burgers1d", "--m", "16", "--p", "32", "--manifest", str(tmp_path))
    assert code == 0
    path = fields(out)[1]["manifest"]
    text = open(path).read().splitlines()
    assert text[0] == "deeponet-manifest v1"
    assert "p 32" in text and "m 16" in text
    model = read_manifest(path)
    assert model.p == 32
    assert len(model.branch_values) == 32
    assert (tmp_path / "burgers1d.trunk0.relu").exists()


def test_every_problem_runs(capsys):
    fast = {
        "burgers1d": ["--m", "16"],
        "burgers2d": ["--m", "64", "--lattice", "4", "--quad-cells", "16"],
        "burgers-forced": ["--paths", "200", "--h-t", "0.05"],
        "advdiff1d": ["--m", "16"],
        "reacdiff2d": ["--grid", "5"],
        "advdiff2d": ["--grid", "5"],
        "bochner-riesz": ["--R", "4", "--samples", "256", "--lattice", "256"],
        "relu-audit": ["--samples", "500"],
    }
    for pid, extra in fast.items():
        code, out, err = run(capsys, pid, *extra)
        assert code == 0, err
        assert out.split()[0] == pid


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "deeponet_rates", "advdiff1d", "--a-const", "0",
                          "--f-const", "1"], capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert "exact=0.125" in res.stdout
