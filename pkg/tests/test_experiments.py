import json

import numpy as np
import pytest

from mhdnudge.dynamics import derive_elsasser_params, grashof_number
from mhdnudge.experiments import (
    EXIT_CHECK,
    EXIT_OK,
    ConfigError,
    ExperimentConfig,
    build_forcing,
    parse_config,
    parse_config_text,
    run_scenario,
    run_sweep,
)
from mhdnudge.spectral import Grid


def test_minimal_config_defaults():
    cfg = parse_config_text("scenario = baseline\n")
    assert cfg.n == 64
    assert cfg.mu == 50.0
    assert cfg.mask == "all"


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError, match="line 2.*not_a_key"):
        parse_config_text("scenario = baseline\nnot_a_key = 3\n")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("scenario = baseline\nmu = 1\nmu = 2\n")


def test_bad_type_reports_key():
    with pytest.raises(ConfigError, match="cannot parse 'n'"):
        parse_config_text("scenario = baseline\nn = sixty-four\n")


def test_missing_scenario_rejected():
    with pytest.raises(ConfigError, match="scenario"):
        parse_config_text("mu = 50\n")


def test_malformed_line_rejected():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("scenario = baseline\njust words\n")


def test_comments_and_blanks_ignored():
    cfg = parse_config_text(
        "# a comment\n\nscenario = baseline\nmu = 12.5  # trailing\n")
    assert cfg.mu == 12.5


def test_unknown_scenario_rejected():
    with pytest.raises(ConfigError, match="scenario"):
        parse_config_text("scenario = warp-drive\n")


def test_invalid_physical_values_rejected():
    with pytest.raises(ConfigError):
        parse_config_text("scenario = baseline\nre = -5\n")
    with pytest.raises(ConfigError):
        parse_config_text("scenario = baseline\nn = 7\n")
    with pytest.raises(ConfigError):
        parse_config_text("scenario = baseline\ninterpolant_h = 0.3\n")
    with pytest.raises(ConfigError):
        parse_config_text("scenario = baseline\nmask = everything\n")


def test_overrides_applied():
    cfg = parse_config_text("scenario = baseline\nseed = 1\n",
                            overrides={"seed": 42})
    assert cfg.seed == 42


def test_dump_parse_round_trip():
    cfg = parse_config_text("scenario = h1track\nmu = 77.0\nn = 32\n")
    again = parse_config_text(cfg.dump())
    assert again == cfg


def test_parse_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("scenario = baseline\nn = 32\n")
    cfg = parse_config(path)
    assert cfg.n == 32


def test_build_forcing_amplitude():
    cfg = parse_config_text("scenario = baseline\nforcing_amplitude = 3.0\n"
                            "forcing_g_amplitude = 1.0\nn = 32\n")
    g = Grid(32)
    forcing = build_forcing(g, cfg)
    # f = f1+g1, g = f1-g1 with ||f1|| = 3 and ||g1|| = 1
    nf2 = np.sum(np.abs(forcing.f.coef) ** 2)
    ng2 = np.sum(np.abs(forcing.g.coef) ** 2)
    assert nf2 + ng2 == pytest.approx(2.0 * (9.0 + 1.0), rel=1e-10)


def test_build_forcing_kolmogorov():
    cfg = parse_config_text("scenario = baseline\nforcing_mode = kolmogorov\n"
                            "forcing_kolmogorov_k = 3\nforcing_amplitude = 2.0\n"
                            "n = 32\n")
    g = Grid(32)
    forcing = build_forcing(g, cfg)
    # energy exactly at k = (0, +-3), first component only
    nz = np.nonzero(np.abs(forcing.f.coef) > 1e-12)
    assert set(zip(*nz)) == {(0, 0, 3), (0, 0, 29)}


def test_sweep_rejects_bad_axis_and_values():
    cfg = parse_config_text("scenario = baseline\n")
    with pytest.raises(ConfigError, match="axis"):
        run_sweep(cfg, "dt", [1.0])
    with pytest.raises(ConfigError, match="values"):
        run_sweep(cfg, "mu", [-1.0])
    with pytest.raises(ConfigError, match="values"):
        run_sweep(cfg, "h", [float("nan")])


def test_sweep_g_needs_nonzero_base(tmp_path):
    cfg = parse_config_text("scenario = baseline\nforcing_amplitude = 0\n"
                            f"outdir = {tmp_path}\nn = 32\n")
    with pytest.raises(ConfigError, match="zero-forcing"):
        run_sweep(cfg, "G", [1.0])


SMALL = """scenario = u-only-exploratory
n = 32
horizon = 2.0
spinup_max_time = 2.0
sample_every = 5
mask = u-only
"""


def test_run_scenario_writes_artifacts(tmp_path):
    cfg = parse_config_text(SMALL + f"outdir = {tmp_path}\n")
    code, summary = run_scenario(cfg)
    assert code == EXIT_OK
    for name in ("config.txt", "trajectory.csv", "errors.csv",
                 "summary.json", "thresholds.json", "constants.json"):
        assert (tmp_path / name).exists(), name
    saved = json.loads((tmp_path / "summary.json").read_text())
    assert saved["scenario"] == "u-only-exploratory"
    assert saved["passed"] is True
    # the embedded config replays to the identical configuration
    again = parse_config(tmp_path / "config.txt")
    assert again == cfg


def test_run_scenario_trajectory_format(tmp_path):
    cfg = parse_config_text(SMALL + f"outdir = {tmp_path}\n")
    run_scenario(cfg)
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,l2_v,l2_w,h1_v,h1_w,energy_residual"
    assert len(lines) == 1 + int(round(2.0 / 0.002)) + 1


def test_thresholds_json_contents(tmp_path):
    cfg = parse_config_text(
        f"scenario = baseline\nn = 32\nhorizon = 2.0\nspinup_max_time = 2.0\n"
        f"outdir = {tmp_path}\n")
    run_scenario(cfg)
    report = json.loads((tmp_path / "thresholds.json").read_text())
    assert set(report["theorems"]) == {"thm-all", "thm-h1-all"}
    for entry in report["theorems"].values():
        assert entry["mu_min"] > 0
        assert entry["h_max"] > 0
        assert "c_L" in entry["constants_used"]


def test_single_value_sweep_matches_plain_run(tmp_path):
    base = SMALL + f"outdir = {tmp_path / 'plain'}\nmu = 25.0\n"
    cfg = parse_config_text(base)
    run_scenario(cfg)
    sweep_cfg = parse_config_text(SMALL + f"outdir = {tmp_path / 'sweep'}\n")
    run_sweep(sweep_cfg, "mu", [25.0], max_workers=1)
    plain = (tmp_path / "plain" / "errors.csv").read_bytes()
    swept = (tmp_path / "sweep" / "mu=25" / "errors.csv").read_bytes()
    assert plain == swept


def test_baseline_failure_exit_code(tmp_path):
    # mu = 0 over a 1-unit horizon cannot reach six orders of decay
    cfg = parse_config_text(
        f"scenario = baseline\nn = 32\nhorizon = 1.0\nspinup_max_time = 2.0\n"
        f"mu = 0.0\noutdir = {tmp_path}\n")
    code, summary = run_scenario(cfg)
    assert code == EXIT_CHECK
    assert summary["passed"] is False


def test_g_sweep_scales_grashof(tmp_path):
    cfg = parse_config_text("scenario = baseline\nn = 32\n")
    g = Grid(32)
    p = derive_elsasser_params(cfg.re, cfg.rm)
    base = grashof_number(build_forcing(g, cfg), p)
    from dataclasses import replace
    doubled = replace(cfg, forcing_amplitude=cfg.forcing_amplitude * 2.0,
                      forcing_g_amplitude=cfg.forcing_g_amplitude * 2.0)
    assert grashof_number(build_forcing(g, doubled), p) == \
        pytest.approx(2.0 * base, rel=1e-12)
