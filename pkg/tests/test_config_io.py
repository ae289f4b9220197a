import json
import math

import numpy as np
import pytest

from holodot import io
from holodot.config import EXPERIMENTS, load_config, parse_config
from holodot.errors import ConfigurationError, NumericalError


def errors_of(text):
    with pytest.raises(ConfigurationError) as info:
        parse_config(text)
    return str(info.value)


@pytest.mark.parametrize("experiment", EXPERIMENTS)
def test_every_experiment_has_defaults(experiment):
    params = {"loops": [{"theta": 1.0}]} if experiment == "compose" else {}
    cfg = parse_config(json.dumps({"experiment": experiment, "parameters": params}))
    assert cfg.output_path == "results" and cfg.seed == 0
    assert cfg.normalized()["experiment"] == experiment


def test_documented_defaults():
    single = parse_config('{"experiment": "single-gate"}').normalized()["parameters"]
    assert single["integrator"]["tolerance"] == 1e-10
    assert single["envelope"]["area"] == math.pi
    sweep = parse_config('{"experiment": "concurrence-sweep"}').normalized()["parameters"]
    assert sweep["points"] == [201, 201]
    assert sweep["phi_ratio"] == [0.0, 4.0] and sweep["crosscheck"] == 100
    fid = parse_config('{"experiment": "fidelity-curve"}').normalized()["parameters"]
    assert fid["masks"] == ["111"] and fid["ratios"] == {"start": 1.0, "stop": 1e4, "num": 20}
    ent = parse_config('{"experiment": "fidelity-curve", "parameters": {"gate": "entangler"}}')
    assert ent.parameters.masks == ["1111"]


def test_negative_gamma_names_the_field():
    msg = errors_of('{"experiment": "single-gate", "parameters": {"noise": {"gamma": -0.1}}}')
    assert "parameters.noise.gamma" in msg


def test_unknown_keys_rejected_at_every_level():
    assert "colour" in errors_of('{"experiment": "verify-all", "colour": 1}')
    assert "parameters.envelope.width" in errors_of(
        '{"experiment": "single-gate", "parameters": {"envelope": {"width": 1}}}')


def test_non_finite_rejected():
    assert "parameters.theta" in errors_of(
        '{"experiment": "single-gate", "parameters": {"theta": NaN}}')
    assert "parameters.alpha" in errors_of(
        '{"experiment": "two-qubit", "parameters": {"alpha": Infinity}}')


def test_malformed_json_reports_position():
    assert "line 3, column" in errors_of('{\n  "experiment": "single-gate",\n  oops\n}')


def test_empty_and_non_object_documents():
    assert "experiment" in errors_of("")
    assert "JSON object" in errors_of("[1, 2]")
    assert "parameters" in errors_of('{"experiment": "single-gate", "parameters": 3}')


def test_mask_validation():
    assert "mask" in errors_of('{"experiment": "single-gate", "parameters": '
                               '{"noise": {"gamma": 0.1, "mask": "1a1"}}}')
    assert "does not fit" in errors_of('{"experiment": "fidelity-curve", "parameters": '
                                       '{"gate": "entangler", "masks": ["111"]}}')


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigurationError, match="cannot read"):
        load_config(tmp_path / "nope.json")


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    rows = rng.normal(size=(50, 2)) * 10.0 ** rng.integers(-12, 12, size=(50, 2))
    path = io.write_csv(tmp_path / "t.csv", io.CURVE_HEADER, rows)
    header, back = io.read_csv(path)
    assert header == ["ratio", "fidelity"]
    np.testing.assert_array_equal(back, rows)
    assert path.read_text().splitlines()[0] == "ratio,fidelity"


def test_csv_rejects_non_finite(tmp_path):
    with pytest.raises(NumericalError):
        io.write_csv(tmp_path / "t.csv", io.CURVE_HEADER, [(1.0, math.nan)])
    with pytest.raises(ValueError):
        io.write_csv(tmp_path / "t.csv", io.CURVE_HEADER, [(1.0, 2.0, 3.0)])


def test_json_matrices_and_ordering(tmp_path):
    m = np.array([[1 + 2j, 0], [0, -1j]])
    path = io.write_json(tmp_path / "g.json", {"b": m, "a": np.float64(0.5), "c": math.inf})
    data = json.loads(path.read_text())
    assert list(data) == ["a", "b", "c"]
    np.testing.assert_array_equal(io.matrix_from_json(data["b"]), m)
    assert data["c"] == "inf"
