import io
import json
import math
import shutil
import subprocess
import sys

import pytest

from pidmaxent import gate, read_distribution
from pidmaxent.cli import main
from pidmaxent.finer import ATOM_NAMES
from pidmaxent.pipeline import ERR_KEYS, KEYS


def _run(argv, stdin=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def _gate_file(tmp_path, name, *extra):
    code, text, _ = _run(["gate", name, *extra])
    assert code == 0
    path = tmp_path / f"{name}.tsv"
    path.write_text(text)
    return path


def test_run_prints_result_keys(tmp_path):
    code, out, err = _run(["run", str(_gate_file(tmp_path, "and-duplicate"))])
    assert code == 0 and err == ""
    payload = json.loads(out)
    assert list(payload) == list(KEYS) + list(ERR_KEYS)
    assert math.isclose(payload["CI"], 0.5, abs_tol=1e-6)


def test_copy_through_stdin(monkeypatch):
    _, text, _ = _run(["gate", "copy", "--sizes", "3,3,3"])
    code, out, _ = _run(["run", "-"], stdin=text, monkeypatch=monkeypatch)
    payload = json.loads(out)
    assert code == 0
    for k in ("UIX", "UIY", "UIZ"):
        assert math.isclose(payload[k], math.log2(3), rel_tol=1e-4)
    assert all(abs(payload[k]) <= 1e-5 for k in ("CI", "UIXY", "UIXZ", "UIYZ", "SI"))


def test_negative_mass_is_an_input_error(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("0 0 0 0 0.5\n1 1 1 1 0.75\n0 1 0 1 -0.25\n")
    code, out, err = _run(["run", str(bad)])
    assert code == 1 and out == "" and "NegativeMass" in err


@pytest.mark.parametrize("argv", [
    ["run", "/nonexistent/file.tsv"],
    ["gate", "nand"],
    ["run", "x.tsv", "--feastol", "-1"],
    ["run", "x.tsv", "--output-level", "5"],
    ["random", "--sizes", "2,a"],
    ["frobnicate"],
])
def test_bad_invocations_exit_one(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "x.tsv").write_text("0 0 0 0 1\n")
    code, out, err = _run(argv)
    assert code == 1 and out == "" and err


def test_solver_failure_exits_two(tmp_path):
    _, text, _ = _run(["random", "--sizes", "2,2,2,4", "--seed", "9"])
    path = tmp_path / "r.tsv"
    path.write_text(text)
    code, out, err = _run(["run", str(path), "--fine", "--max_iter", "1"])
    assert code == 2 and out == "" and "SolverFailed" in err


def test_repaired_run_warns(tmp_path):
    _, text, _ = _run(["random", "--sizes", "2,2,2,4", "--seed", "9"])
    path = tmp_path / "r.tsv"
    path.write_text(text)
    code, out, err = _run(["run", str(path), "--max_iter", "1"])
    assert code == 0 and "repaired" in err
    json.loads(out)


def test_gate_output():
    _, text, _ = _run(["gate", "xor-duplicate"])
    assert len(text.splitlines()) == 4
    _, text, _ = _run(["gate", "xor-multicoal"])
    assert len(text.splitlines()) == 8
    # composite symbols survive the round trip
    assert read_distribution(text) == gate("xor-multicoal")


@pytest.mark.parametrize("fmt", ["tsv", "json"])
def test_random_is_reproducible_and_round_trips(fmt):
    argv = ["random", "--sizes", "2,2,2,5", "--seed", "7", "--format", fmt]
    _, a, _ = _run(argv)
    _, b, _ = _run(argv)
    assert a == b
    d = read_distribution(a)
    assert d.alphabet_sizes == (2, 2, 2, 5)
    _, again, _ = _run(["random", "--sizes", "2,2,2,5", "--seed", "7", "--format", "json"])
    assert read_distribution(again) == d


def test_fine_adds_atoms(tmp_path):
    code, out, _ = _run(["run", str(_gate_file(tmp_path, "xor-multicoal")), "--fine"])
    payload = json.loads(out)
    assert code == 0
    assert list(payload["atoms"]) == list(ATOM_NAMES)
    assert math.isclose(payload["atoms"]["XY.XZ.YZ"], 1.0, abs_tol=1e-6)


def test_parallel_flag_keeps_output(tmp_path):
    path = str(_gate_file(tmp_path, "xor-loses"))
    assert _run(["run", path])[1] == _run(["run", path, "--parallel"])[1]


def test_output_level_goes_to_stderr(tmp_path):
    path = str(_gate_file(tmp_path, "and-duplicate"))
    _, plain, _ = _run(["run", path])
    code, out, err = _run(["run", path, "--output-level", "3"])
    assert code == 0 and out == plain
    assert err.startswith("Synergistic information:") and "Per-step timings" in err


def test_tolerance_flags_reach_the_solver(tmp_path):
    path = str(_gate_file(tmp_path, "xor-loses"))
    code, out, _ = _run(["run", path, "--feastol", "1e-8", "--abstol", "1e-7"])
    assert code == 0 and json.loads(out)["CI"] >= 0.0


@pytest.mark.skipif(shutil.which("pid-maxent") is None, reason="console script not installed")
def test_console_script_pipe():
    gen = subprocess.run(["pid-maxent", "gate", "copy", "--sizes", "2,2,2"],
                         capture_output=True, text=True, check=True)
    run = subprocess.run(["pid-maxent", "run", "-"], input=gen.stdout,
                         capture_output=True, text=True)
    assert run.returncode == 0
    assert math.isclose(json.loads(run.stdout)["UIX"], 1.0, rel_tol=1e-4)
