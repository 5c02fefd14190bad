import json
import os

import numpy as np
import pytest
import yaml

from ballcap.cli import dispatch
from ballcap.config import (
    ConfigError,
    RunConfig,
    config_from_dict,
    dump_config,
    load_config,
)


def test_config_round_trip(tmp_path):
    cfg = RunConfig()
    cfg.kernel.family = "weighted-dirichlet"
    cfg.kernel.parameter = 0.5
    cfg.set.kind = "arc"
    cfg.set.arc_end = float(np.pi)
    cfg.resolutions = [16, 32]
    path = tmp_path / "run.yaml"
    dump_config(cfg, path)
    back = load_config(path)
    assert back.to_dict() == cfg.to_dict()


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="mystery"):
        config_from_dict({"mystery": 1})
    with pytest.raises(ConfigError, match="kernel.times"):
        config_from_dict({"kernel": {"times": 3}})


def test_validation_messages_carry_key_paths():
    with pytest.raises(ConfigError, match="kernel.parameter"):
        config_from_dict({"kernel": {"family": "weighted-dirichlet"}})
    with pytest.raises(ConfigError, match="set.resolution"):
        config_from_dict({"set": {"resolution": 0}})
    with pytest.raises(ConfigError, match=r"r_values\[0\]"):
        config_from_dict({"r_values": [1.5]})


def test_malformed_point_exits_2(tmp_path, capsys):
    cfg = {
        "kernel": {"dimension": 1},
        "set": {"kind": "finite-points", "points": [[2.0, 0.0]]},
    }
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(cfg))
    code = dispatch(["--config", str(path), "cap"])
    assert code == 2
    assert "set.points" in capsys.readouterr().err


def test_kernels_list(capsys):
    assert dispatch(["kernels-list"]) == 0
    out = capsys.readouterr().out
    assert "drury-arveson" in out and "variants:" in out


def test_cap_smoke(tmp_path, capsys):
    code = dispatch(
        [
            "--out",
            str(tmp_path),
            "--kernel",
            "drury-arveson",
            "--variant",
            "real",
            "--d",
            "2",
            "--set",
            "flat-circle",
            "--resolution",
            "32",
            "--r-depth",
            "6",
            "cap",
        ]
    )
    assert code == 0
    payload = json.loads((tmp_path / "cap.json").read_text())
    assert payload["schema"] == "ballcap/capacity-estimate/v1"
    assert payload["extrapolated_cap"] == pytest.approx(1.0, abs=1e-3)
    assert (tmp_path / "cap.csv").exists()


def test_energy_smoke_and_env_outdir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("BALLCAP_OUT", str(tmp_path / "env-out"))
    code = dispatch(
        [
            "--kernel",
            "hardy-poisson",
            "--d",
            "1",
            "--arc-length",
            "0.25",
            "--resolution",
            "16",
            "--r-depth",
            "5",
            "energy",
        ]
    )
    assert code == 0
    csv_path = tmp_path / "env-out" / "energy.csv"
    assert csv_path.exists()
    header = csv_path.read_text().splitlines()[1]
    assert header == "# columns: r, E_r, series_E_r, increment"


def test_eqmeasure_and_dual_smoke(tmp_path):
    common = [
        "--out",
        str(tmp_path),
        "--kernel",
        "hardy-poisson",
        "--d",
        "1",
        "--arc-length",
        "0.5",
        "--resolution",
        "24",
        "--r-depth",
        "6",
    ]
    assert dispatch(common + ["eqmeasure"]) == 0
    eq = json.loads((tmp_path / "eqmeasure.json").read_text())
    assert eq["schema"] == "ballcap/equilibrium/v1"
    assert len(eq["weights"]) == 24
    assert os.path.exists(tmp_path / "eqmeasure.csv")
    assert dispatch(common + ["dual"]) == 0
    dual = json.loads((tmp_path / "dual.json").read_text())
    assert abs(dual["duality_residual"]) <= 1e-8


def test_maximal_smoke(tmp_path):
    code = dispatch(
        [
            "--out",
            str(tmp_path),
            "--kernel",
            "hardy-poisson",
            "--d",
            "2",
            "maximal",
            "--grid-size",
            "32",
            "--alpha",
            "2",
        ]
    )
    assert code == 0
    csv_lines = (tmp_path / "maximal.csv").read_text().splitlines()
    assert csv_lines[1] == "# columns: label, alpha, t, cap_estimate, ratio"


def test_unbounded_smoke(tmp_path):
    cfg = {
        "kernel": {"family": "hardy-poisson", "dimension": 2, "variant": "real"},
        "set": {"kind": "tangential-circle", "resolution": 64},
        "r_depth": 19,
    }
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(cfg))
    code = dispatch(
        ["--config", str(path), "--out", str(tmp_path), "unbounded", "--stages", "6"]
    )
    assert code == 0
    payload = json.loads((tmp_path / "unbounded.json").read_text())
    assert payload["min_re_on_set"] >= 6 * (1 - 1e-3)
    assert payload["norm_exact"] <= payload["norm_budget"] + 1e-9


def test_scenario_cli_exit_codes(tmp_path):
    code = dispatch(
        ["--out", str(tmp_path), "scenario", "dual-choquet", "--fast"]
    )
    assert code == 0
    assert (tmp_path / "scenario-dual-choquet.json").exists()


def test_flag_overrides_config(tmp_path):
    cfg = RunConfig()
    cfg.r_depth = 4
    path = tmp_path / "run.yaml"
    dump_config(cfg, path)
    # --r-depth flag wins over the config value
    code = dispatch(
        [
            "--config",
            str(path),
            "--out",
            str(tmp_path),
            "--r-depth",
            "3",
            "--set",
            "flat-circle",
            "--resolution",
            "8",
            "--variant",
            "real",
            "cap",
        ]
    )
    assert code == 0
    payload = json.loads((tmp_path / "cap.json").read_text())
    assert len(payload["r_grid"]) == 3
