import warnings
from pathlib import Path

import numpy as np
import pytest
import yaml

from hybridbem import cli
from hybridbem.config import ConfigError, ConfigWarning, dump_config, load_config, parse_beta, parse_config
from hybridbem.halfspace import SolverError

BASE = {
    "kind": "validate-vs-image",
    "wave": {"omega": 2.0},
    "trunc": {"M0": 12, "N0": 12, "a": 2},
    "mesh": {"per_wavelength": 10},
    "geometry": {"source": [1.0, 3.0]},
    "grid": {"x": [-2, 2], "y": [0.5, 3], "shape": [5, 4]},
    "validate": {"threshold": 1e-3},
    "output": {"prefix": "t"},
}


def _cfg(**over):
    d = yaml.safe_load(yaml.safe_dump(BASE))
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(d.get(key), dict):
            d[key].update(val)
        else:
            d[key] = val
    return d


def _write(tmp_path, d, name="c.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(d))
    return p


def test_defaults_and_round_trip():
    cfg = parse_config({"kind": "halfspace", "geometry": {"source": [0, 2]}})
    assert cfg.trunc == {"M0": 20.0, "N0": 30.0, "a": 2.0}
    assert cfg.mesh["quad_order"] == 10
    assert parse_config(yaml.safe_load(dump_config(cfg))).to_dict() == cfg.to_dict()


def test_default_N0_scales_with_frequency():
    cfg = parse_config({"kind": "halfspace", "wave": {"omega": 15}, "geometry": {"source": [0, 2]}})
    assert cfg.trunc["N0"] == 45.0


def test_beta_forms():
    assert parse_beta("-i/k", 2.0) == -0.5j
    assert parse_beta("i/k", 4.0) == 0.25j
    assert parse_beta([0.0, -1.0], 1.0) == -1j
    assert parse_beta(0, 1.0) == 0


@pytest.mark.parametrize("bad", [
    {"kind": "nope"},
    {"kind": "halfspace", "wave": {"omega": -1}, "geometry": {"source": [0, 1]}},
    {"kind": "halfspace", "extra": 1},
    {"kind": "halfspace"},
    {"kind": "halfspace", "geometry": {"source": [0, -1]}},
    {"kind": "halfspace", "geometry": {"source": [0, 2], "circles": [{"center": [0, 0.3], "radius": 0.5}]}},
    {"kind": "cavity"},
    {"kind": "cavity", "geometry": {"source1": [0, 5], "cavity": {"cavity_radius": 4}}},
    {"kind": "cavity", "geometry": {"source1": [0, 5], "scatterers1": [{"center": [0, 6], "radius": 0.2}]}},
    {"kind": "validate-vs-image", "geometry": {"source1": [0, 5]}},
    {"kind": "halfspace", "geometry": {"source": [0, 2]}, "sweep": {"param": "k", "start": 2}},
    {"kind": "halfspace", "geometry": {"source": [0, 2]}, "sweep": {"param": "k", "start": 2, "stop": 1, "step": 0.1}},
    {"kind": "halfspace", "geometry": {"source": [0, 2]}, "grid": {"x": [1, -1]}},
    "kind: [unclosed",
    "- a list",
])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_guidance_warnings():
    with pytest.warns(ConfigWarning, match="N0"):
        parse_config({"kind": "halfspace", "wave": {"omega": 10}, "trunc": {"N0": 8},
                      "geometry": {"source": [0, 2]}})
    with pytest.warns(ConfigWarning, match="M0"):
        parse_config({"kind": "halfspace", "trunc": {"M0": 2},
                      "geometry": {"source": [-3, 2], "circles": [{"center": [3, 2], "radius": 1}]}})
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        parse_config({"kind": "halfspace", "geometry": {"source": [0, 2]}})


def test_sweep_values_are_ordered():
    cfg = parse_config(_cfg(sweep={"param": "k", "start": 1.0, "stop": 1.5, "step": 0.1}))
    assert cfg.sweep_values() == [1.0, 1.1, 1.2, 1.3, 1.4, 1.5]
    assert cfg.max_k() == 1.5


def test_header_has_eight_lines_and_round_trips():
    cfg = parse_config(_cfg())
    h = cli.header(cfg, "solve")
    lines = h.splitlines()
    assert len(lines) == 8 and all(line.startswith("# ") for line in lines)
    assert cli.config_from_header(h).to_dict() == cfg.to_dict()


def test_validate_pass_and_threshold(tmp_path):
    assert cli.main(["validate", str(_write(tmp_path, _cfg())), "--out", str(tmp_path), "--quiet"]) == 0
    text = (tmp_path / "t_errors.csv").read_text()
    cfg = cli.config_from_header(text)
    assert cfg.to_dict() == load_config(tmp_path / "c.yaml").to_dict()
    assert "passed: true" in (tmp_path / "t_summary.txt").read_text()
    strict = _write(tmp_path, _cfg(validate={"threshold": 1e-14}), "s.yaml")
    assert cli.main(["validate", str(strict), "--out", str(tmp_path), "--quiet"]) == 4


def test_config_error_exit_codes(tmp_path, monkeypatch):
    assert cli.main(["solve", str(tmp_path / "missing.yaml"), "--quiet"]) == 2
    bad = _write(tmp_path, {"kind": "halfspace"})
    assert cli.main(["solve", str(bad), "--quiet"]) == 2
    ok = _write(tmp_path, _cfg(kind="halfspace"), "ok.yaml")
    assert cli.main(["sweep", str(ok), "--out", str(tmp_path), "--quiet"]) == 2
    assert cli.main(["solve", str(ok), "--workers", "0", "--quiet"]) == 2
    monkeypatch.setenv(cli.ENV_WORKERS, "many")
    assert cli.main(["solve", str(ok), "--out", str(tmp_path), "--quiet"]) == 2


def test_solver_failure_exit_code(tmp_path, monkeypatch):
    def boom(problem):
        raise SolverError("singular", 0.0)

    monkeypatch.setattr(cli, "_solve", boom)
    ok = _write(tmp_path, _cfg(kind="halfspace"))
    assert cli.main(["solve", str(ok), "--out", str(tmp_path), "--quiet"]) == 3


def test_solve_outputs_are_deterministic(tmp_path):
    d = _cfg(kind="halfspace", geometry={"source": [1.0, 3.0], "circles": [{"center": [0, 1.5], "radius": 0.4}]})
    c = _write(tmp_path, d)
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert cli.main(["solve", str(c), "--out", str(out), "--quiet"]) == 0
        outs.append(out)
    for name in ("t_field.csv", "t_densities.csv", "t_residuals.csv"):
        a, b = (o / name for o in outs)
        assert a.read_bytes() == b.read_bytes()
    field = np.genfromtxt(outs[0] / "t_field.csv", delimiter=",", skip_header=9)
    assert field.shape[1] == 5
    np.testing.assert_allclose(field[:, 4], field[:, 2] ** 2 + field[:, 3] ** 2, rtol=1e-12)
    summary = (outs[0] / "t_summary.txt").read_text()
    assert "rcond:" in summary and "max_residual:" in summary


def test_cavity_solve_runs(tmp_path):
    d = _cfg(kind="cavity", geometry={"source": None, "source1": [0.5, 3.5],
                                      "cavity": {"shape": "half_disc", "cavity_radius": 0.5, "virtual_radius": 1.5}},
             grid={"x": [-2, 2], "y": [-0.4, 3], "shape": [5, 5]})
    c = _write(tmp_path, d)
    assert cli.main(["solve", str(c), "--out", str(tmp_path), "--quiet"]) == 0
    field = np.genfromtxt(tmp_path / "t_field.csv", delimiter=",", skip_header=9)
    assert np.all(np.isfinite(field)) and len(field) > 0


def test_sweep_order_and_workers(tmp_path, monkeypatch):
    d = _cfg(sweep={"param": "omega", "start": 1.5, "stop": 2.0, "step": 0.25})
    c = _write(tmp_path, d)
    serial, par = tmp_path / "s", tmp_path / "p"
    assert cli.main(["sweep", str(c), "--out", str(serial), "--quiet"]) == 0
    monkeypatch.setenv(cli.ENV_WORKERS, "2")
    assert cli.main(["sweep", str(c), "--out", str(par), "--quiet"]) == 0
    a = (serial / "t_sweep.csv").read_bytes()
    assert a == (par / "t_sweep.csv").read_bytes()
    rows = np.genfromtxt(serial / "t_sweep.csv", delimiter=",", skip_header=9)
    np.testing.assert_allclose(rows[:, 0], [1.5, 1.75, 2.0])
    assert np.all(rows[:, 1] < 1e-2)
    assert "workers: 2" in (par / "t_summary.txt").read_text()


def test_M0N0_sweep(tmp_path):
    d = _cfg(sweep={"param": "M0N0", "values": [[8, 8], [12, 12]]})
    c = _write(tmp_path, d)
    assert cli.main(["sweep", str(c), "--out", str(tmp_path), "--quiet"]) == 0
    rows = np.genfromtxt(tmp_path / "t_sweep.csv", delimiter=",", skip_header=9)
    assert rows.shape == (2, 4)


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "hybridbem", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "validate" in r.stdout
    assert Path(cli.__file__).exists()
