import json
import subprocess
import sys
from pathlib import Path

import pytest

from bundlecalc import checks, cli
from bundlecalc.serialize import dumps

DEMO = Path(cli.__file__).parent / "data" / "demo.json"

MODULE = {
    "space": {"atoms": 3, "weights": [1, 1, 1]},
    "g": 2,
    "seminorms": [
        {"kind": "quadratic", "G": [[0, 0], [0, 0]]},
        {"kind": "quadratic", "G": [[1, 0], [0, 0]]},
        {"kind": "quadratic", "G": [[1, 0], [0, 1]]},
    ],
}


@pytest.fixture
def module_file(tmp_path):
    path = tmp_path / "module.json"
    path.write_text(json.dumps(MODULE))
    return str(path)


def run(*argv):
    return subprocess.run([sys.executable, "-m", "bundlecalc.cli", *argv],
                          capture_output=True, text=True, timeout=120)


def test_decompose_three_atom_example(module_file):
    report, code = cli.run_command(["decompose", module_file])
    assert code == 0
    assert report["result"]["modules"]["main"]["dims"] == [0, 1, 2]


def test_roundtrip_passes(module_file):
    report, code = cli.run_command(["roundtrip", module_file])
    assert code == 0 and report["verdict"] == "pass"
    assert all(c["max_error"] <= 1e-9 for c in report["checks"])


def test_reconstruct_reports_pivots(module_file):
    report, code = cli.run_command(["reconstruct", module_file])
    assert code == 0
    assert report["result"]["bundles"]["main"]["pivots"] == [[], [0], [0, 1]]


@pytest.mark.parametrize("argv, key", [
    (["gamma", str(DEMO), "--bundle", "T"], "modules"),
    (["dual", str(DEMO)], "bundles"),
    (["tensor", str(DEMO), "--left", "H", "--right", "T"], "bundle"),
    (["pullback", str(DEMO), "--map", "collapse", "--bundle", "TY"], "bundle"),
    (["pullback", str(DEMO), "--map", "collapse", "--bundle", "TY", "--ac"], "bundle"),
    (["quantize", str(DEMO), "--eps", "0.001"], "sections"),
    (["lp", str(DEMO), "--p", "inf"], "elements"),
])
def test_subcommands_succeed_on_demo(argv, key):
    report, code = cli.run_command(argv)
    assert code == 0, report
    assert key in report["result"]


def test_dist_values_on_demo():
    assert cli.run_command(["dist", "l0", str(DEMO), "f", "g"])[0]["result"]["distance"] == \
        pytest.approx(1.1)
    report, code = cli.run_command(["dist", "gamma", str(DEMO), "s", "s"])
    assert code == 0 and report["result"]["distance"] == 0.0
    report, code = cli.run_command(["dist", "module", str(DEMO), "e1", "e2"])
    assert report["result"]["distance"] == pytest.approx(1 / 3)


def test_pullback_reports_compression():
    report, _ = cli.run_command(["pullback", str(DEMO), "--map", "collapse", "--bundle", "TY"])
    assert report["result"]["compression_constant"] == 1.0
    assert report["result"]["bundle"]["dims"] == [1, 1, 2, 2]


@pytest.mark.parametrize("argv", [
    ["frobnicate"], [], ["quantize", str(DEMO)], ["dist", "hamming", str(DEMO), "a", "b"],
    ["check", "--seed", "x"],
])
def test_usage_errors_exit_1(argv):
    report, code = cli.run_command(argv)
    assert code == 1
    assert report["error"]["kind"] == "usage"


@pytest.mark.parametrize("argv", [
    ["decompose", "/nonexistent/file.json"],
    ["tensor", str(DEMO), "--left", "T", "--right", "mixed"],
    ["dist", "gamma", str(DEMO), "s", "u"],
    ["quantize", str(DEMO), "--eps", "-1"],
    ["lp", str(DEMO), "--p", "0.5"],
    ["gamma", str(DEMO), "--bundle", "nope"],
    ["pullback", str(DEMO), "--map", "collapse", "--bundle", "T"],
])
def test_input_errors_exit_1(argv):
    report, code = cli.run_command(argv)
    assert code == 1
    assert "error" in report


def test_instance_errors_list_pointers(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"version": "1", "sections": {"s": {"bundle": "T", "vectors": []}}}))
    report, code = cli.run_command(["decompose", str(path)])
    assert code == 1
    assert report["error"]["errors"][0]["pointer"] == "/sections/s/bundle"


def test_numeric_failure_exits_2(monkeypatch):
    failing = checks.CheckResult("planted", False, 1.0, "exact", 0, 1)
    monkeypatch.setattr(checks, "run_all", lambda seed, trials: [failing])
    report, code = cli.run_command(["check", "--trials", "1"])
    assert code == 2 and report["verdict"] == "fail"


def test_seed_environment_override(monkeypatch):
    seen = {}

    def fake(seed, trials):
        seen["seed"] = seed
        return []
    monkeypatch.setattr(checks, "run_all", fake)
    monkeypatch.setenv("BUNDLECALC_SEED", "7")
    cli.run_command(["check"])
    assert seen["seed"] == 7
    cli.run_command(["check", "--seed", "9"])
    assert seen["seed"] == 9


def test_timing_is_opt_in(module_file):
    assert "wall_time" not in cli.run_command(["decompose", module_file])[0]
    assert "wall_time" in cli.run_command(["--timing", "decompose", module_file])[0]


def test_check_on_files_runs_instance_suites(module_file):
    report, code = cli.run_command(["check", "--trials", "2", module_file, str(DEMO)])
    assert code == 0
    names = [c["name"] for c in report["checks"]]
    assert "module.json#module:main" in names
    assert "demo.json#bundle:mixed" in names


def test_reports_are_byte_identical_across_processes(module_file):
    first = run("check", "--seed", "3", "--trials", "2", module_file)
    second = run("check", "--seed", "3", "--trials", "2", module_file)
    assert first.returncode == second.returncode == 0
    assert first.stdout == second.stdout
    assert first.stdout == dumps(json.loads(first.stdout)) + "\n"
    assert "finished with exit code 0" in first.stderr


def test_full_check_on_bundled_demo_exits_0():
    result = run("check", "--seed", "42")
    assert result.returncode == 0, result.stderr
    report = json.loads(result.stdout)
    assert report["verdict"] == "pass"
    assert {c["seed"] for c in report["checks"]} == {42}
