import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from heatprop.cli import run


def call(argv, capsys):
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_presets(capsys):
    code, out, _ = call(["presets"], capsys)
    assert code == 0
    assert out.split() == [
        "classical", "linear_potential", "hyperbolic", "hyperbolic_half", "oscillator", "cosh_model", "cos_model"
    ]


def test_kernel_point(capsys):
    code, out, _ = call(["kernel", "--preset", "classical", "--t", "0.25", "--x", "0", "--y", "0"], capsys)
    assert code == 0 and out == "0.564190\n"


def test_kernel_grid_and_log(capsys):
    argv = ["kernel", "--preset", "hyperbolic", "--t", "0.5", "--nx", "3", "--ny", "2", "--xmin", "-1", "--xmax", "1"]
    code, out, _ = call(argv, capsys)
    table = rows(out)
    assert code == 0 and table[0] == ["x", "y", "K"] and len(table) == 7
    code, out_log, _ = call(argv + ["--log"], capsys)
    logs = rows(out_log)
    assert logs[0][2] == "logK"
    for r, lr in zip(table[1:], logs[1:]):
        assert float(lr[2]) == pytest.approx(np.log(float(r[2])), abs=1e-10)


def test_coeffs_json(capsys):
    code, out, _ = call(["coeffs", "--preset", "classical", "--t", "0.25"], capsys)
    data = json.loads(out)
    assert code == 0
    assert list(data) == ["t", "t0", "alpha", "beta", "gamma", "delta", "epsilon", "kappa"]
    assert data["alpha"] == pytest.approx(-1.0) and data["beta"] == pytest.approx(2.0)


def test_mu_csv(capsys):
    code, out, _ = call(["mu", "--preset", "oscillator", "--t-end", "1", "--n", "3", "--tol", "1e-9"], capsys)
    table = rows(out)
    assert code == 0 and table[0] == ["t", "mu", "dmu"]
    assert float(table[3][1]) == pytest.approx(np.sin(1.0), rel=1e-9)


def test_solve_constant(capsys):
    code, out, _ = call(["solve", "--preset", "classical", "--data", "constant:2", "--t", "0.5", "--grid", "-1:1:5"], capsys)
    table = rows(out)
    assert code == 0 and table[0] == ["x", "u"] and len(table) == 6
    assert all(float(r[1]) == pytest.approx(2.0, abs=1e-10) for r in table[1:])


def test_solve_file_data(tmp_path, capsys):
    path = tmp_path / "u0.csv"
    xs = np.linspace(-6, 6, 601)
    path.write_text("x,u\n" + "".join(f"{x!r},{float(np.exp(-x * x))!r}\n" for x in xs.tolist()))
    code, out, _ = call(["solve", "--preset", "classical", "--data", f"file:{path}", "--t", "0.3", "--grid", "0:1:3"], capsys)
    assert code == 0
    u = [float(r[1]) for r in rows(out)[1:]]
    exact = np.exp(-np.array([0, 0.5, 1]) ** 2 / 2.2) / np.sqrt(2.2)
    np.testing.assert_allclose(u, exact, atol=1e-4)


def test_solve_beyond_horizon_exits_2(capsys):
    code, out, err = call(
        ["solve", "--preset", "cosh_model", "--data", "constant:1", "--t", "1.2", "--grid", "-1:1:5"], capsys
    )
    assert code == 2 and out == ""
    line = json.loads(err)
    assert line["error"] == "DivergentIntegralError" and line["exit"] == 2


def test_duhamel(capsys):
    code, out, _ = call(
        ["duhamel", "--preset", "classical", "--source", "x^2 - 2*s", "--t", "0.5", "--grid", "-1:1:5"], capsys
    )
    assert code == 0
    for x, u in rows(out)[1:]:
        assert float(u) == pytest.approx(0.5 * float(x) ** 2, abs=1e-10)


def test_problem_file_and_override(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"a": "1", "t0": 0.5}))
    code, out, _ = call(["coeffs", "--problem", str(path), "--t", "0.75"], capsys)
    assert code == 0 and json.loads(out)["t0"] == 0.5 and json.loads(out)["alpha"] == pytest.approx(-1.0)
    code, out, _ = call(["coeffs", "--problem", str(path), "--t0", "0.0", "--t", "0.25"], capsys)
    assert code == 0 and json.loads(out)["t0"] == 0.0


def test_verify_command(capsys):
    code, out, _ = call(["verify", "--preset", "hyperbolic"], capsys)
    reports = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and reports and all(r["passed"] for r in reports)
    residual = reports[0]["report"]
    assert {"max_residual", "scale", "probe_count", "grid_steps"} <= set(residual)


def test_output_file(tmp_path, capsys):
    target = tmp_path / "k.csv"
    code, out, _ = call(["kernel", "--preset", "classical", "--t", "1", "--nx", "2", "--ny", "2", "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert target.read_text().startswith("x,y,K\n")


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["kernel", "--t", "1"],
        ["kernel", "--preset", "classical"],
        ["kernel", "--preset", "classical", "--problem", "p.json", "--t", "1"],
        ["kernel", "--preset", "nope", "--t", "1"],
        ["kernel", "--preset", "classical", "--t", "-1"],
        ["solve", "--preset", "classical", "--t", "1", "--data", "cube:1"],
        ["solve", "--preset", "classical", "--t", "1", "--data", "constant:1", "--grid", "1:2"],
        ["duhamel", "--preset", "classical", "--t", "1", "--source", "q*x"],
        ["mu", "--preset", "classical", "--tol", "0.5"],
        ["mu", "--problem", "/does/not/exist.json"],
        ["kernel", "--preset", "classical", "--param", "a=x", "--t", "1"],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    code, out, err = call(argv, capsys)
    assert code == 1
    assert json.loads(err.strip().splitlines()[-1])["exit"] == 1


def test_deterministic_output(capsys):
    argv = ["kernel", "--preset", "cosh_model", "--t", "0.5", "--nx", "5", "--ny", "5"]
    _, first, _ = call(argv, capsys)
    _, second, _ = call(argv, capsys)
    assert first == second
    digits = [v.split("e")[0].replace("-", "").replace(".", "").lstrip("0") for r in rows(first)[1:] for v in r]
    assert all(len(d) <= 12 for d in digits)


def test_thread_setting_does_not_change_output(monkeypatch, capsys):
    argv = ["solve", "--preset", "hyperbolic", "--data", "constant:1", "--t", "0.5", "--grid", "-2:2:200"]
    monkeypatch.setenv("HEATPROP_THREADS", "1")
    _, serial, _ = call(argv, capsys)
    monkeypatch.setenv("HEATPROP_THREADS", "4")
    _, parallel, _ = call(argv, capsys)
    assert serial == parallel
    monkeypatch.setenv("HEATPROP_THREADS", "lots")
    assert call(argv, capsys)[0] == 1


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "heatprop.cli", "presets"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and "cosh_model" in proc.stdout
