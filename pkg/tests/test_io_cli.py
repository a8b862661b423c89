import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from squintless import io as sio
from squintless.cli import main
from squintless.model import MultiFreqTensor, ScenarioError
from tests.conftest import desk_scenario


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


DESK = {"n_rx": 9, "n_tx": 9, "n_freq": 2, "sources": [
    {"omega_r": 0.10, "omega_t": 0.15, "coeffs": {"random_phase": 0.7071067811865476}},
    {"omega_r": 0.45, "omega_t": 0.60, "coeffs": {"random_phase": 0.7071067811865476}}]}


def test_scenario_round_trip():
    scen = desk_scenario()
    back = sio.scenario_from_dict(json.loads(sio.dumps(sio.scenario_to_dict(scen))))
    for a, b in zip(scen.sources, back.sources):
        assert np.allclose(a.coeffs, b.coeffs) and a.omega_r == b.omega_r


def test_tensor_round_trip(tmp_path, rng):
    t = MultiFreqTensor(rng.normal(size=(2, 3, 4)) + 1j * rng.normal(size=(2, 3, 4)))
    sio.write_tensor(tmp_path / "t.json", t)
    assert np.array_equal(sio.read_tensor(tmp_path / "t.json").slices, t.slices)


def test_tensor_header_mismatch():
    d = sio.tensor_to_dict(MultiFreqTensor(np.ones((1, 2, 2))))
    d["header"]["n_rx"] = 3
    with pytest.raises(sio.TensorFileError, match="do not match"):
        sio.tensor_from_dict(d)


def test_missing_field_is_named():
    with pytest.raises(ScenarioError, match=r"sources\[0\]\.coeffs"):
        sio.scenario_from_dict({"n_rx": 3, "n_tx": 3, "n_freq": 1,
                                "sources": [{"omega_r": 0.1, "omega_t": 0.2}]})


def test_non_finite_written_as_null():
    assert json.loads(sio.dumps({"x": float("inf"), "z": 1j})) == {"x": None, "z": [0.0, 1.0]}


def test_heatmap_csv_round_trip(tmp_path):
    g = np.arange(4) / 4
    vals = np.outer(g, 1 - g)
    sio.write_heatmap_csv(tmp_path / "h.csv", g, g[:3], vals[:, :3])
    wr, wt, v = sio.read_heatmap_csv(tmp_path / "h.csv")
    assert np.array_equal(wr, g) and np.array_equal(wt, g[:3]) and np.array_equal(v, vals[:, :3])


def test_synth_is_deterministic(tmp_path):
    cfg = _write(tmp_path / "s.json", DESK)
    outs = []
    for name in ("a.json", "b.json"):
        assert main(["synth", "--config", cfg, "--seed", "7", "--out", str(tmp_path / name)]) == 0
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]


def test_synth_missing_coeffs_exit_2(tmp_path, capsys):
    bad = {"n_rx": 3, "n_tx": 3, "n_freq": 1, "sources": [{"omega_r": 0.1, "omega_t": 0.2}]}
    assert main(["synth", "--config", _write(tmp_path / "s.json", bad)]) == 2
    assert "coeffs" in capsys.readouterr().err


def test_solve_recovers_pairs_and_writes_figures(tmp_path):
    cfg = _write(tmp_path / "s.json", DESK)
    t = str(tmp_path / "t.json")
    assert main(["synth", "--config", cfg, "--seed", "3", "--out", t]) == 0
    out = tmp_path / "r.json"
    code = main(["solve", t, "--truth", cfg, "--seed", "3", "--out", str(out), "--grid", "64",
                 "--plot", "--threads", "1"])
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["pairs"]) == 2 and max(doc["truth_errors"]) <= 5e-3
    assert (tmp_path / "r_dual.csv").exists()
    assert len(doc["figures"]) == 2 and all(Path(f).exists() for f in doc["figures"])


def test_solve_zero_tensor_gives_no_pairs(tmp_path):
    t = tmp_path / "z.json"
    sio.write_tensor(t, MultiFreqTensor(np.zeros((2, 5, 5))))
    out = tmp_path / "r.json"
    assert main(["solve", str(t), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["pairs"] == []


def test_solve_corrupted_header_exit_2(tmp_path, capsys):
    t = tmp_path / "t.json"
    _write(t, {"header": {"n_rx": 2}, "slices": []})
    assert main(["solve", str(t)]) == 2
    assert "header" in capsys.readouterr().err


def test_certify_below_separation_exit_4(tmp_path, capsys):
    scen = {"n_rx": 33, "n_tx": 33, "n_freq": 1, "sources": [
        {"omega_r": 0.1, "omega_t": 0.2, "coeffs": [[1, 0]]},
        {"omega_r": 0.102, "omega_t": 0.2, "coeffs": [[0, 1]]}]}
    code = main(["certify", "--config", _write(tmp_path / "c.json", scen),
                 "--out", str(tmp_path / "o.json"), "--grid", "64"])
    assert code == 4
    assert "separation" in capsys.readouterr().err


def test_certify_report_matches_schema(tmp_path):
    scen = {"n_rx": 33, "n_tx": 33, "n_freq": 2, "sources": [
        {"omega_r": 0.1, "omega_t": 0.2, "coeffs": {"random_phase": 0.7071067811865476}},
        {"omega_r": 0.4, "omega_t": 0.75, "coeffs": {"random_phase": 0.7071067811865476}}]}
    out = tmp_path / "o.json"
    main(["certify", "--config", _write(tmp_path / "c.json", scen), "--out", str(out),
          "--grid", "64", "--heatmap"])
    schema = json.loads(resources.files("squintless").joinpath(
        "schemas/certificate_report.json").read_text())
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, schema)
    assert doc["support_ok"] and (tmp_path / "o_heatmap.csv").exists()


def test_oracle_command(tmp_path):
    scen = {"n_rx": 3, "n_tx": 3, "n_freq": 2, "sources": [
        {"omega_r": 0.2, "omega_t": 0.7, "coeffs": [[0.5, 0], [0, 0.5]]}]}
    out = tmp_path / "o.json"
    assert main(["oracle", "--config", _write(tmp_path / "c.json", scen), "--out", str(out),
                 "--grid", "32"]) == 0
    assert json.loads(out.read_text())["objective_difference"] < 1e-4


def test_version(capsys):
    assert main(["version"]) == 0
    assert capsys.readouterr().out.startswith("squintless ")


def test_bad_grid_exit_2():
    assert main(["solve", "x.json", "--grid", "0"]) == 2
