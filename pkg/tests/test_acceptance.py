"""End-to-end acceptance suite.

Each test prints one PASS/FAIL line for its criterion before asserting, so
a full run of this module doubles as the acceptance report.  The expensive
reference runs are shared through module-scope fixtures.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from mhdnudge import diagnostics as diag
from mhdnudge.diagnostics import (
    THM_ALL,
    THM_FIRST,
    THM_H1_ALL,
    THM_H1_FIRST,
    THM_H1_V,
    THM_T2_FIRST,
    THM_V,
    check_int_bound,
    decay_window_fit,
    theorem_thresholds,
)
from mhdnudge.dynamics import derive_elsasser_params, energy_budget, grashof_number
from mhdnudge.experiments import build_forcing, parse_config_text, run_scenario
from mhdnudge.interpolants import (
    MASK_ALL,
    MASK_FIRST,
    MASK_V_ONLY,
    NODAL,
    SPECTRAL,
    VOLUME,
    InterpolantSpec,
    apply_interpolant_coef,
    calibrate,
    verify_type1_bound,
)
from mhdnudge.nudging import CoupledStepper, NudgingConfig, run_assimilation
from mhdnudge.spectral import (
    Grid,
    SpectralScalar,
    h1_seminorm,
    h2_seminorm,
    l2_norm,
    random_scalar_field,
)

from conftest import normalized_field

GOLDEN = json.loads((Path(__file__).parent / "golden_summary.json").read_text())


def report(num, desc, ok):
    print(f"\n[criterion {num:2d}] {'PASS' if ok else 'FAIL'}: {desc}",
          flush=True)
    return ok


def converged(fit, orders=6.0, r2=0.98):
    return fit["orders_of_decay"] >= orders and fit["r_squared"] >= r2


@pytest.fixture(scope="module")
def grid64():
    return Grid(64)


@pytest.fixture(scope="module")
def params64():
    g = GOLDEN["baseline"]
    return derive_elsasser_params(g["re"], g["rm"])


@pytest.fixture(scope="module")
def forcing64(grid64):
    return build_forcing(grid64, parse_config_text("scenario = baseline\n"))


def nudged_run(grid, params, forcing, mask, kind, h, mu):
    g = GOLDEN["baseline"]
    cfg = NudgingConfig(mu, InterpolantSpec(kind, h), mask)
    init = normalized_field(grid, 0, 1.0)
    start = time.monotonic()
    result = run_assimilation(grid, params, forcing, cfg, init, init.copy(),
                              g["dt"], g["horizon"], sample_every=5)
    elapsed = time.monotonic() - start
    return result, elapsed


@pytest.fixture(scope="module")
def baseline_run(grid64, params64, forcing64):
    g = GOLDEN["baseline"]
    result, elapsed = nudged_run(grid64, params64, forcing64, g["mask"],
                                 g["interpolant_kind"], g["h"], g["mu"])
    return result, elapsed


@pytest.fixture(scope="module")
def abridged_runs(grid64, params64, forcing64):
    out = {}
    for key in ("first", "v-only"):
        g = GOLDEN[key]
        out[key], _ = nudged_run(grid64, params64, forcing64, g["mask"],
                                 g["interpolant_kind"], g["h"], g["mu"])
    return out


def test_criterion_1_full_observation_sync(baseline_run, grid64):
    result, elapsed = baseline_run
    fit = decay_window_fit(result.errors.times, result.errors.l2_total())
    ok = converged(fit) and elapsed < 300.0
    report(1, f"full-observation L2 sync: {fit['orders_of_decay']:.1f} orders, "
              f"R^2={fit['r_squared']:.4f}, {elapsed:.0f}s", ok)
    assert ok


def test_criterion_2_h1_tracking(baseline_run):
    result, _ = baseline_run
    l2 = decay_window_fit(result.errors.times, result.errors.l2_total())
    h1 = decay_window_fit(result.errors.times, result.errors.h1_total())
    dt_sample = np.diff(result.errors.times).max()
    onset_ok = h1["onset_time"] >= l2["onset_time"] - dt_sample
    ok = converged(h1) and onset_ok
    report(2, f"H1 tracking: {h1['orders_of_decay']:.1f} orders, "
              f"R^2={h1['r_squared']:.4f}, onset {h1['onset_time']:.3f} vs "
              f"L2 {l2['onset_time']:.3f}", ok)
    assert ok


def test_criterion_3_abridged_observations(abridged_runs):
    ok = True
    parts = []
    for key, result in abridged_runs.items():
        fit = decay_window_fit(result.errors.times, result.errors.l2_total())
        ok = ok and converged(fit)
        parts.append(f"{key}: {fit['orders_of_decay']:.1f} orders")
    h_ok = all(GOLDEN[k]["h"] <= GOLDEN["baseline"]["h"]
               for k in ("first", "v-only"))
    ok = ok and h_ok
    report(3, "abridged masks converge at recorded (mu, h); " + ", ".join(parts),
           ok)
    assert ok


def test_criterion_4_type2_interpolant(grid64, params64, forcing64):
    g = GOLDEN["type2"]
    spec = calibrate(InterpolantSpec(NODAL, g["h"]), grid64, 200, 0)
    assert spec.c2 is not None and spec.c3 is not None
    result, _ = nudged_run(grid64, params64, forcing64, g["mask"],
                           g["interpolant_kind"], g["h"], g["mu"])
    fit = decay_window_fit(result.errors.times, result.errors.h1_total())
    ok = fit["orders_of_decay"] >= 4.0 and fit["rate"] > 0
    report(4, f"nodal bilinear (c2={spec.c2:.3g}, c3={spec.c3:.3g}) H1 decay "
              f"{fit['orders_of_decay']:.1f} orders", ok)
    assert ok


def test_criterion_5_b_only_negative_control(tmp_path):
    cfg = parse_config_text(
        "scenario = b-only-control\n"
        "n = 64\nre = 100.0\nrm = 100.0\n"
        "forcing_mode = kolmogorov\nforcing_kolmogorov_k = 4\n"
        "forcing_amplitude = 2.0\nforcing_g_amplitude = 0.0\n"
        "mask = b-only\nmu = 50.0\ninit_mode = random\n"
        f"horizon = {GOLDEN['baseline']['horizon']}\n"
        f"outdir = {tmp_path}\n")
    code, summary = run_scenario(cfg)
    l2 = summary["l2_fit"]
    ok = code == 0 and summary["checks"]["non_convergence"]
    report(5, f"b-only observations fail to synchronize the velocity "
              f"(terminal/initial = {l2['terminal'] / l2['peak']:.2e})", ok)
    assert ok


def test_criterion_6_interpolant_inequalities(grid64):
    c1_raw = verify_type1_bound(InterpolantSpec(SPECTRAL, 0.125), grid64,
                                n_samples=1000, seed=0)
    c1_ok = c1_raw <= 1.0 / (2.0 * np.pi) + 1e-6
    violations = 0
    specs = [calibrate(InterpolantSpec(k, 0.125), grid64, 1000, 0)
             for k in (SPECTRAL, VOLUME, NODAL)]
    for i in range(1000):
        u = random_scalar_field(grid64, 10_000 + i)
        gu = h1_seminorm(u)
        lu = h2_seminorm(u)
        for spec in specs:
            res = l2_norm(SpectralScalar(
                grid64, u.coef - apply_interpolant_coef(spec, grid64, u.coef)))
            if spec.type_class == 1:
                bound = spec.c1 * spec.h * gu
            else:
                bound = spec.c2 * spec.h * gu + spec.c3 * spec.h ** 2 * lu
            if res > bound:
                violations += 1
    ok = c1_ok and violations == 0
    report(6, f"interpolant inequalities: raw spectral c1={c1_raw:.4f} "
              f"<= 1/(2 pi), {violations} violations on 1000 fresh fields", ok)
    assert ok


def test_criterion_7_a_priori_bound(baseline_run, forcing64, params64):
    result, _ = baseline_run
    G = grashof_number(forcing64, params64)
    full = check_int_bound(result.reference_trajectory, G, params64)
    halved = check_int_bound(result.reference_trajectory, G / 2.0, params64)
    ok = full["passed"] and full["worst_margin"] > 0 and not halved["passed"]
    report(7, f"a-priori enstrophy bound: margin {full['worst_margin']:.2f} at "
              f"G={G:.1f}; halved-G control margin "
              f"{halved['worst_margin']:.2f}", ok)
    assert ok


def test_criterion_8_energy_budget(baseline_run, abridged_runs, params64):
    worst = -np.inf
    ok = True
    for result in [baseline_run[0]] + list(abridged_runs.values()):
        traj = result.reference_trajectory
        residuals, flags = energy_budget(traj, params64)
        ok = ok and not flags.any()
        worst = max(worst, float(residuals.max()))
    report(8, f"energy budget residuals within tolerance at every step "
              f"(worst {worst:.2e})", ok)
    assert ok


def test_criterion_9_threshold_exactness():
    p = derive_elsasser_params(5.0, 5.0)
    nub = 0.2
    ok = True
    C = 81.0 / (64.0 * np.pi ** 4)
    ct = np.log(1000.0 * (20.0 * np.pi ** 2 + 1.0)) / 8.0
    for G in (0.0, 1.0, 2.0):
        got = theorem_thresholds(THM_ALL, G, p, c1=0.1)
        want = 0.0 if G == 0 else \
            np.pi ** 2 * (1.0 / (4.0 * np.pi ** 2) + nub ** 4) * G ** 2 / nub
        ok = ok and np.isclose(got.mu_min, want, rtol=1e-12)
        got = theorem_thresholds(THM_FIRST, G, p, c1=0.1)
        want = 0.0 if G == 0 else \
            32.0 * np.pi ** 2 * 1.5 ** 2 * nub \
            * (ct + 2.0 * np.log(G) + C * G ** 4) * G ** 2
        ok = ok and np.isclose(got.mu_min, want, rtol=1e-12)
        got = theorem_thresholds(THM_V, G, p, c1=0.1)
        want = 0.0 if G == 0 else \
            np.pi ** 2 / (4.0 * np.pi ** 2) * G ** 2 \
            * (4.0 + nub ** 2 * G ** 2) ** 2 / (16.0 * nub)
        ok = ok and np.isclose(got.mu_min, want, rtol=1e-12)
        got = theorem_thresholds(THM_T2_FIRST, G, p, c2=0.2, c3=0.3)
        want = 0.0 if G == 0 else \
            2000.0 * 4.0 * (20.0 * np.pi ** 2 + 1.0) * G ** 2 \
            * (1.0 + G ** 2) ** 3 * np.exp(2.0 * C * G ** 4) \
            * (ct + np.log(1.0 + G) + C * G ** 4)
        ok = ok and np.isclose(got.mu_min, want, rtol=1e-12)
    r1 = theorem_thresholds(THM_ALL, 1.0, p, c1=0.1)
    r2 = theorem_thresholds(THM_ALL, 2.0, p, c1=0.1)
    ok = ok and np.isclose(r2.mu_min / r1.mu_min, 4.0, rtol=1e-12)
    for l2_id, h1_id in ((THM_ALL, THM_H1_ALL), (THM_FIRST, THM_H1_FIRST),
                         (THM_V, THM_H1_V)):
        a = theorem_thresholds(l2_id, 1.0, p, c1=0.1)
        b = theorem_thresholds(h1_id, 1.0, p, c1=0.1)
        ok = ok and np.isclose(a.h_max / b.h_max, 2.0 * np.sqrt(2.0),
                               rtol=1e-12)
    report(9, "threshold formulas match hand values at G in {0, 1, 2}, "
              "G^2-homogeneity 4, H1 h-tightening 2 sqrt(2)", ok)
    assert ok


def test_criterion_10_determining_interpolant(tmp_path):
    cfg = parse_config_text(
        f"scenario = determining\nn = 64\nhorizon = 20.0\n"
        f"outdir = {tmp_path}\n")
    code, summary = run_scenario(cfg)
    c = summary["checks"]
    ok = (code == 0 and c["ih_difference_decays"]
          and c["full_difference_decays"] and c["terminal_below_1e3_peak"])
    report(10, f"determining interpolant: full-difference tail rate "
               f"{summary['tail_rate_full']:.2f}, terminal/peak "
               f"{summary['terminal_full_difference'] / summary['peak_full_difference']:.2e}",
           ok)
    assert ok


def test_criterion_11_zero_error_absorbing_state(params64):
    grid = Grid(32)
    forcing = build_forcing(grid, parse_config_text("scenario = baseline\nn = 32\n"))
    worst = 0.0
    for mask in (MASK_ALL, MASK_FIRST, MASK_V_ONLY):
        cfg = NudgingConfig(50.0, InterpolantSpec(SPECTRAL, 0.125), mask)
        cs = CoupledStepper(grid, params64, forcing, cfg, 2e-3)
        init = normalized_field(grid, 0, 0.5)
        cs.reference.set_state(init.coef, init.coef, 0.0)
        cs.assimilated.set_state(init.coef, init.coef, 0.0)
        for _ in range(1000):
            cs.step()
        ev, ew = cs.error_coefs()
        err = float(np.sqrt(np.sum(np.abs(ev) ** 2) + np.sum(np.abs(ew) ** 2)))
        worst = max(worst, err)
    ok = worst <= 1e-10
    report(11, f"identical initialization stays synchronized for 1000 steps "
               f"in all three masks (worst error {worst:.2e})", ok)
    assert ok


def test_criterion_12_determinism(tmp_path):
    text = ("scenario = baseline\nn = 64\nhorizon = 3.0\n"
            "spinup_max_time = 4.0\nsample_every = 5\n")
    cfg_a = parse_config_text(text + f"outdir = {tmp_path / 'a'}\n")
    cfg_b = parse_config_text(text + f"outdir = {tmp_path / 'b'}\n")
    run_scenario(cfg_a)
    run_scenario(cfg_b)
    same = all(
        (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        for name in ("trajectory.csv", "errors.csv"))
    report(12, "repeated runs with equal seeds emit bitwise-identical CSVs",
           same)
    assert same
