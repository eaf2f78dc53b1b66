import csv
import json
import os
import re

import pytest

from wavebreak.cli import SWEEP_COLUMNS, main

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(tmp_path, command, text=None, config=None, out="out", extra=()):
    argv = [command, "--out", str(tmp_path / out)]
    if text is not None:
        argv += ["--config", write(tmp_path, text, out + ".ini")]
    elif config is not None:
        argv += ["--config", os.path.join(CONFIGS, config)]
    return main(argv + list(extra)), tmp_path / out


def load(path):
    return json.loads(path.read_text())


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def assert_manifest(out):
    man = load(out / "manifest.json")
    assert man["outputs"]
    for p in man["outputs"]:
        assert (out / p).stat().st_size > 0
    assert "version" in man and man["duration_seconds"] >= 0


def test_criteria_burgers(tmp_path):
    code, out = run(tmp_path, "criteria", "[model]\nkind = burgers\n[criteria]\ntheta = 0.5\n")
    assert code == 0
    rep = load(out / "criteria.json")
    assert rep["rhs"] == 0 and rep["holds"] is True
    assert_manifest(out)


def test_criteria_fw_s2_routes_to_case_iv(tmp_path):
    code, out = run(tmp_path, "criteria", config="fw_s2.ini")
    assert code == 0 and load(out / "criteria.json")["case_label"] == "fw-case-iv"


@pytest.mark.parametrize("text", [
    "[model]\nkind = nonsense\n",
    "[model]\nkind = burgers\ntypo = 1\n",
    "[unknown]\nx = 1\n",
    "[grid]\nn = many\n",
    "not an ini file",
    "[model]\nkind = whitham\n[criteria]\ntheta = 0.3\nc_gn = 1.0\n",
    "[model]\nkind = fkdv\nalpha = -0.2\n[criteria]\nc_gn = 1.0\n",
    "[model]\nkind = fw\ns = 0.3\n[criteria]\nc_gn = 1.0\n",
])
def test_bad_config_exit_2(tmp_path, text, capsys):
    code, _ = run(tmp_path, "criteria", text)
    assert code == 2
    assert capsys.readouterr().err.strip()


def test_range_error_names_admissible_range(tmp_path, capsys):
    code, _ = run(tmp_path, "criteria", "[model]\nkind = whitham\n[criteria]\ntheta = 0.3\nc_gn = 1.0\n")
    assert code == 2 and "1/8" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert main(["criteria", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)]) == 2


def test_simulate_burgers_sine(tmp_path):
    code, out = run(tmp_path, "simulate", config="burgers_sine.ini")
    assert code == 0
    for name in ("trace.csv", "estimate.json", "criteria.json", "checks.json", "manifest.json"):
        assert (out / name).exists()
    est = load(out / "estimate.json")
    assert est["within_bounds"] is True and abs(est["t_star_est"] - 1) < 0.02
    assert_manifest(out)


def test_simulate_whitham(tmp_path):
    code, out = run(tmp_path, "simulate", config="whitham.ini")
    assert code == 0 and load(out / "estimate.json")["within_bounds"] is True


def test_simulate_max_time(tmp_path):
    text = "[model]\nkind = burgers\n[criteria]\ntheta = 0.5\n[simulation]\nmax_time = 0.1\n"
    code, out = run(tmp_path, "simulate", text)
    est = load(out / "estimate.json")
    assert code == 0 and est["stop_reason"] == "max_time" and est["within_bounds"] is None


def test_simulate_reruns_are_byte_identical(tmp_path):
    _, a = run(tmp_path, "simulate", config="burgers_sine.ini", out="a")
    _, b = run(tmp_path, "simulate", config="burgers_sine.ini", out="b")
    for name in ("trace.csv", "estimate.json", "criteria.json", "checks.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_full_precision_output(tmp_path):
    _, out = run(tmp_path, "simulate", config="burgers_sine.ini")
    body = (out / "trace.csv").read_text().splitlines()[1:50]
    numbers = [v for line in body for v in line.split(",")]
    # non-terminating values carry 17 significant digits
    long = [v for v in numbers if len(re.sub(r"e.*|[-.]", "", v).lstrip("0")) == 17]
    assert len(long) > 0.8 * len(numbers)
    text = (out / "estimate.json").read_text()
    assert re.search(r'"t_star_est": \d\.\d{16}', text)


SWEEP = """[model]
kind = whitham
[criteria]
theta = 0.1
c_gn = 1.0097
[sweep]
simulate = false
"""


def test_sweep_3x3(tmp_path):
    text = SWEEP.replace("kind = whitham", "kind = fw\ntau = 0.8").replace("theta = 0.1", "theta = 0.1") + \
        "amplitudes = 10, 20, 40\ns_values = 0.8, 0.9, 2.0\n"
    code, out = run(tmp_path, "sweep", text, extra=["--workers", "2"])
    r = rows(out / "sweep.csv")
    assert code == 0 and len(r) == 9
    assert list(r[0]) == list(SWEEP_COLUMNS)
    assert [(row["s"], row["amplitude"]) for row in r] == sorted(
        [(row["s"], row["amplitude"]) for row in r], key=lambda p: (float(p[0]), float(p[1])))


def test_sweep_empty_grid(tmp_path):
    code, out = run(tmp_path, "sweep", SWEEP + "amplitudes =\n")
    assert code == 0
    assert (out / "sweep.csv").read_text().strip() == ",".join(SWEEP_COLUMNS)


def test_sweep_holds_flips_once(tmp_path):
    amps = ", ".join(str(a) for a in (5, 10, 20, 40, 60, 80, 100, 150, 200, 400, 800))
    code, out = run(tmp_path, "sweep", SWEEP + f"amplitudes = {amps}\n", extra=["--workers", "1"])
    holds = [row["holds"] for row in rows(out / "sweep.csv")]
    assert holds[0] == "false" and holds[-1] == "true"
    assert sum(1 for a, b in zip(holds, holds[1:]) if a != b) == 1


def test_sweep_is_deterministic_across_workers(tmp_path):
    text = SWEEP + "amplitudes = 10, 50, 200\nthetas = 0.05, 0.1\n"
    _, a = run(tmp_path, "sweep", text, out="a", extra=["--workers", "1"])
    _, b = run(tmp_path, "sweep", text, out="b", extra=["--workers", "3"])
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()


def test_sweep_records_partial_failures(tmp_path):
    text = SWEEP.replace("theta = 0.1", "theta = 0.1") + "amplitudes = 10\nthetas = 0.1, 0.5\n"
    code, out = run(tmp_path, "sweep", text)
    r = rows(out / "sweep.csv")
    assert code == 0 and len(r) == 2
    assert r[0]["error"] == "" and "theta" in r[1]["error"]


def test_kernels(tmp_path):
    code, out = run(tmp_path, "kernels", config="kernels.ini")
    assert code == 0
    for name in ("whitham_kernel.csv", "bessel_kernel.csv", "gamma.csv"):
        assert (out / name).stat().st_size > 0
    assert {float(row["s"]) for row in rows(out / "bessel_kernel.csv")} == {0.3, 0.5, 0.9, 1.5, 3.0}
    man = load(out / "manifest.json")
    assert any("s = 1" in n for n in man.get("notes", []))
    g = rows(out / "gamma.csv")
    near = [row for row in g if abs(float(row["s"]) - 1) < 1e-2]
    assert near and all(abs(float(row["abs_1_minus_s_gamma"]) - 0.6366) < 0.01 for row in near)
    assert min(float(row["margin"]) for row in rows(out / "bessel_kernel.csv")) >= -1e-6


def test_verify_command(tmp_path):
    code, out = run(tmp_path, "verify", extra=["--seed", "1"])
    checks = load(out / "verify.json")
    assert code == 0 and len(checks) > 1000
    assert all(c["pass"] or c["status"] == "inconclusive" for c in checks)
