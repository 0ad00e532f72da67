import json
import subprocess
import sys

import numpy as np
import pytest

from ccmpc.cli import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main
from ccmpc.config import example_path

from oracles import example1_contraction_probability


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_bound(capsys):
    code, out, _ = run(capsys, "bound", "--alpha", "0.8", "--beta", "0.05",
                       "--epsilon", "0.01", "--p0", "1.96")
    assert code == EXIT_OK
    assert "khat  = 24" in out
    phat = float(out.split("P_hat = ")[1].split()[0])
    ref = np.prod([1 - 0.05 * 0.8 ** i for i in range(24)])
    assert phat == pytest.approx(ref, abs=1e-6)


@pytest.mark.parametrize("argv", [
    ["bound", "--alpha", "0.8", "--beta", "0.05"],                         # neither khat nor epsilon/p0
    ["bound", "--alpha", "1.2", "--beta", "0.05", "--khat", "3"],
    ["bound", "--alpha", "0.8", "--beta", "0.05", "--khat", "0"],
    ["bound", "--alpha", "0.8"],                                           # argparse error
    ["plan", "--config", "no_such_file.json", "--state", "1,1"],
    ["plan", "--config", "example1", "--state", "1,1,1"],
    ["simulate", "--config", "example1", "--x0", "1,1", "--max-steps", "0"],
    ["validate", "--config", "example1", "--state", "1,1", "--input", "-0.5", "--samples", "10"],
    ["inspect-moments", "--uniform", "0,1"],
    ["inspect-moments", "--uniform", "0,1", "--delta", "0", "--degree", "2"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as info:
        sys.exit(main(argv))
    assert info.value.code == EXIT_USAGE
    assert capsys.readouterr().err


def test_plan_target_reached(capsys):
    code, out, _ = run(capsys, "plan", "--config", "example1", "--state", "0.1,0.1")
    assert code == EXIT_OK
    assert "target reached; no solve" in out


def test_plan_writes_json(capsys, tmp_path):
    path = tmp_path / "plan.json"
    code, out, _ = run(capsys, "plan", "--config", "example1", "--state", "1,1",
                       "--order", "3", "--json", str(path))
    d = json.loads(path.read_text())
    assert code == (EXIT_OK if d["certified"] else EXIT_VALIDATION)
    assert -1.0 <= d["u_k"][0] <= 1.0
    assert d["solver_status"] == "optimal"


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--config", "example1", "--state", "1,1",
                       "--input", "-0.5634", "--samples", "20000", "--seed", "3")
    assert code == EXIT_OK
    p = float(out.split("contraction probability ")[1].split()[0])
    assert abs(p - example1_contraction_probability(-0.5634)) < 0.01


@pytest.mark.parametrize("name,tol", [("example1", 1e-3), ("example2", 5e-3)])
def test_replay_reproduces_fixture(capsys, tmp_path, name, tol):
    # the recorded states carry three decimals, so agreement is to that precision
    fixture = example_path(f"{name}_replay")
    out = tmp_path / "trace.json"
    code, _, _ = run(capsys, "simulate", "--config", name, "--replay", str(fixture), "--out", str(out))
    assert code == EXIT_OK
    trace = json.loads(out.read_text())
    states = np.array([s["state"] for s in trace["steps"]] + [trace["final_state"]])
    printed = np.array(json.loads(fixture.read_text())["states"]).T
    assert np.max(np.abs(states - printed)) < tol
    assert out.with_suffix(".csv").exists()


def test_simulate_seed_is_byte_identical(capsys, tmp_path):
    paths = []
    for i in range(2):
        p = tmp_path / f"run{i}.json"
        code, _, _ = run(capsys, "simulate", "--config", "example1", "--x0", "1,1", "--seed", "42",
                         "--max-steps", "2", "--samples", "2000", "--order", "2", "--out", str(p))
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].with_suffix(".csv").read_bytes() == paths[1].with_suffix(".csv").read_bytes()


def test_inspect_moments(capsys):
    code, out, _ = run(capsys, "inspect-moments", "--delta", "0.3", "--degree", "4")
    assert code == EXIT_OK
    assert "rank ratio" in out
    first = float(out.split("first moments ")[1].split()[0].strip("[],"))
    assert first == pytest.approx(0.3, abs=1e-9)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ccmpc.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "ccmpc" in proc.stdout
