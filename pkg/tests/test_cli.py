import json

import numpy as np
import pytest

from shearmodes.cli import Pipeline, deep_merge, load_config, main

FAST = {
    "grid": {"y_max": 30.0, "ny": 201, "t0": 0.06, "nt": 4},
    "eigen": {"scan_n": [7, 5]},
}


def _write_cfg(tmp_path, extra):
    cfg = deep_merge(FAST, extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_default_config_is_valid():
    cfg = load_config(None)
    assert cfg["profile"]["family"] == "gaussian-bump"


def test_unknown_family_is_config_error(tmp_path):
    cfg = _write_cfg(tmp_path, {"profile": {"family": "bogus"}})
    rc = main(["heat", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 2


def test_bad_json_is_config_error(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{nope")
    rc = main(["heat", "--config", str(p), "--out", str(tmp_path / "o")])
    assert rc == 2


def test_heat_command_writes_deterministic_artifacts(tmp_path):
    cfg = _write_cfg(tmp_path, {})
    outs = []
    for sub in ("a", "b"):
        rc = main(["heat", "--config", cfg, "--out", str(tmp_path / sub)])
        assert rc == 0
        outs.append((tmp_path / sub / "heat").joinpath)
    for name in ("heat_field.csv", "heat_report.json", "manifest.json"):
        b1 = outs[0](name).read_bytes()
        b2 = outs[1](name).read_bytes()
        assert b1 == b2, name


def test_heat_report_contents(tmp_path):
    cfg = _write_cfg(tmp_path, {})
    rc = main(["heat", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 0
    rep = json.loads((tmp_path / "o" / "heat" / "heat_report.json").read_text())
    assert rep["heat_residual_probe"] < 1e-6
    assert rep["wall_max"] == 0.0
    man = json.loads((tmp_path / "o" / "heat" / "manifest.json").read_text())
    assert "config_sha256" in man and "package_version" in man


def test_eigen_command_no_root_in_upper_rectangle(tmp_path):
    cfg = _write_cfg(tmp_path, {"eigen": {"rect": [-5.0, 5.0, 0.05, 5.0],
                                          "scan_n": [5, 4]}})
    rc = main(["eigen", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 3
    err = json.loads((tmp_path / "o" / "eigen" / "error.json").read_text())
    assert err["error"] == "NoRootFound"


@pytest.mark.slow
def test_eigen_command_default_artifact(tmp_path):
    cfg = _write_cfg(tmp_path, {"eigen": {"scan_n": [11, 8]}})
    rc = main(["eigen", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 0
    art = json.loads((tmp_path / "o" / "eigen" / "eigenpair.json").read_text())
    assert art["tau_im"] < 0
    assert art["residual_norm"] < 1e-8
    assert art["matrix_oracle_gap"] < 1e-4
    assert art["refinement_drift"] < 1e-6
    assert (tmp_path / "o" / "eigen" / "V_profile.csv").exists()


def test_pipeline_shares_field_and_path():
    cfg = load_config(None)
    cfg = deep_merge(cfg, FAST)
    pipe = Pipeline(cfg)
    assert pipe.field is pipe.field
    assert pipe.path is pipe.path


def test_mode_initial_data_is_eps_linear():
    cfg = deep_merge(load_config(None), FAST)
    pipe = Pipeline(cfg)
    u64 = pipe.mode_initial(64)
    u128 = pipe.mode_initial(128)
    assert np.max(np.abs(2.0 * u128 - u64)) < 1e-15
