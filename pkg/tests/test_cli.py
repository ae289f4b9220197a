import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from holodot import io
from holodot.cli import main


def write_config(path, experiment, out, **params):
    cfg = {"experiment": experiment, "parameters": params, "output_path": str(out)}
    path.write_text(json.dumps(cfg))
    return str(path)


@pytest.fixture(autouse=True)
def no_env_override(monkeypatch):
    monkeypatch.delenv("HOLODOT_OUTPUT_DIR", raising=False)


def report(out):
    return json.loads((out / "report.json").read_text())


def test_single_gate_hadamard(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", write_config(tmp_path / "c.json", "single-gate", out,
                                     theta=math.pi / 4, phi=0.0)]) == 0
    gate = json.loads((out / "gate.json").read_text())
    h = io.matrix_from_json(gate["holonomy"])
    assert np.abs(h - np.array([[1, 1], [1, -1]]) / math.sqrt(2)).max() < 1e-9
    rep = report(out)
    assert rep["passed"] and rep["outputs"] == ["gate.json"]
    assert {"name", "value", "threshold", "passed"} <= set(rep["checks"][0])
    assert "PASS" in capsys.readouterr().out


def test_single_gate_with_noise_records_fidelity(tmp_path):
    out = tmp_path / "out"
    main(["run", write_config(tmp_path / "c.json", "single-gate", out,
                              noise={"gamma": 1 / (100 * math.pi)})])
    assert json.loads((out / "gate.json").read_text())["fidelity"] == pytest.approx(
        0.9955383634701412, abs=1e-9)


def test_compose_and_two_qubit(tmp_path):
    loops = [{"theta": math.pi / 2}, {"theta": math.pi / 2, "phi": math.pi / 8}]
    assert main(["run", write_config(tmp_path / "a.json", "compose", tmp_path / "a",
                                     loops=loops)]) == 0
    assert main(["run", write_config(tmp_path / "b.json", "two-qubit", tmp_path / "b",
                                     target_concurrence=1.0, amp1=0.0,
                                     noise={"gamma": 0.01, "mask": "101101"})]) == 0
    gate = json.loads((tmp_path / "b" / "gate.json").read_text())
    assert gate["concurrence"] == pytest.approx(1.0, abs=1e-6)
    assert 0.9 < gate["fidelity"] < 1


def test_sweep_diagonal_is_zero(tmp_path):
    out = tmp_path / "s"
    assert main(["run", write_config(tmp_path / "s.json", "concurrence-sweep", out)]) == 0
    header, rows = io.read_csv(out / "concurrence.csv")
    assert header == ["phi_ratio", "alpha_ratio", "concurrence"]
    assert rows.shape == (201 * 201, 3)
    assert (rows[rows[:, 0] == 1.0, 2] == 0).all()
    meta = json.loads((out / "concurrence.json").read_text())
    assert meta["points"] == [201, 201] and meta["max_concurrence"] == 1.0


def test_fidelity_outputs(tmp_path):
    out = tmp_path / "f"
    assert main(["run", write_config(tmp_path / "f.json", "fidelity-curve", out,
                                     gate="pi8", masks=["101", "010"],
                                     ratios={"num": 5})]) == 0
    header, rows = io.read_csv(out / "fidelity_pi8_101.csv")
    assert header == ["ratio", "fidelity"] and rows.shape == (5, 2)
    meta = json.loads((out / "fidelity_pi8_010.json").read_text())
    assert meta["mask"] == "010" and meta["channel"] == "site-dephasing"
    assert meta["gate"] == "pi/8" and meta["ensemble"] == "axial-6"
    assert main(["run", write_config(tmp_path / "e.json", "fidelity-curve", out,
                                     gate="entangler", tau_ratios=[1.0, 3.0],
                                     ratios={"num": 3})]) == 0
    header, rows = io.read_csv(out / "fidelity_entangler_1111.csv")
    assert header == ["tau_ratio", "inv_gamma_tau", "fidelity"] and rows.shape == (6, 3)


def test_outputs_are_byte_identical(tmp_path):
    texts = []
    for run in ("r1", "r2"):
        out = tmp_path / run
        main(["run", write_config(tmp_path / f"{run}.json", "concurrence-sweep", out,
                                  points=[21, 31], crosscheck=10)])
        main(["run", write_config(tmp_path / f"{run}f.json", "fidelity-curve", out,
                                  ratios={"num": 4})])
        texts.append([(out / n).read_bytes() for n in
                      ("concurrence.csv", "fidelity_hadamard_111.csv", "concurrence.json")])
    assert texts[0] == texts[1]


def test_validate_prints_defaults(tmp_path, capsys):
    path = write_config(tmp_path / "c.json", "concurrence-sweep", tmp_path)
    assert main(["validate", path]) == 0
    shown = json.loads(capsys.readouterr().out)
    assert shown["parameters"]["points"] == [201, 201]
    path = write_config(tmp_path / "d.json", "single-gate", tmp_path)
    main(["validate", path])
    assert json.loads(capsys.readouterr().out)["parameters"]["integrator"]["tolerance"] == 1e-10


def test_config_errors_exit_2(tmp_path, capsys):
    path = write_config(tmp_path / "c.json", "single-gate", tmp_path, noise={"gamma": -1})
    assert main(["validate", path]) == 2
    assert "parameters.noise.gamma" in capsys.readouterr().err
    assert main(["run", path]) == 2
    (tmp_path / "bad.json").write_text('{"experiment": ')
    assert main(["run", str(tmp_path / "bad.json")]) == 2
    assert "line 1" in capsys.readouterr().err
    assert main(["verify-all", "--tolerance", "-1"]) == 2


def test_numerical_failure_exit_3(tmp_path):
    out = tmp_path / "o"
    path = write_config(tmp_path / "c.json", "single-gate", out, envelope={"area": 2.0})
    assert main(["run", path]) == 3
    rep = report(out)
    assert not rep["passed"] and "CyclicityError" in rep["error"]
    assert rep["checks"][0]["passed"] is False


def test_output_dir_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("HOLODOT_OUTPUT_DIR", str(tmp_path / "env"))
    main(["run", write_config(tmp_path / "c.json", "single-gate", tmp_path / "cfg")])
    assert (tmp_path / "env" / "gate.json").exists()
    assert not (tmp_path / "cfg").exists()


def test_module_entry_point(tmp_path):
    path = write_config(tmp_path / "c.json", "two-qubit", tmp_path / "o")
    proc = subprocess.run([sys.executable, "-m", "holodot", "validate", path],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["parameters"]["alpha"] == 1.0


CONFIGS = sorted((Path(__file__).resolve().parents[1] / "configs").glob("*.json"))


@pytest.mark.parametrize("path", CONFIGS, ids=[p.stem for p in CONFIGS])
def test_shipped_configs_validate(path, capsys):
    assert main(["validate", str(path)]) == 0
    json.loads(capsys.readouterr().out)


@pytest.mark.parametrize("name", ["hadamard", "pi8", "entangler", "fidelity_entangler"])
def test_shipped_configs_run(name, tmp_path, monkeypatch):
    monkeypatch.setenv("HOLODOT_OUTPUT_DIR", str(tmp_path))
    assert main(["run", str(Path(__file__).resolve().parents[1] / "configs" / f"{name}.json")]) == 0
