"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its measured numbers.

Run with `pytest tests/test_acceptance.py -v -s` to see every line.
"""

import math
import time

import numpy as np
import pytest

from resetloop.closedloop import (
    LoopConfig,
    bode_integral,
    compute_sensitivity_curves,
    design_addon,
    linear_sensitivity_mag,
    sensitivity_harmonics_at,
    two_resets_check,
)
from resetloop.design import PhaseTarget, make_cglp, solve_omega_f, theta_cglp, theta_max
from resetloop.fixtures import (
    MODE_OMEGA,
    OMEGA_RES,
    baseline_controller,
    default_grid,
    default_plant,
)
from resetloop.harmonics import cglp_hosidf, hosidf_reset
from resetloop.lti import NotchSpec
from resetloop.reset import (
    clegg,
    discretize_reset,
    gfore,
    identity_element,
    run_sequence,
    simulate_sinusoid_steady,
)
from resetloop.sim import (
    DisturbanceSpec,
    error_psd,
    make_trajectory,
    settling_metrics,
    simulate_closed_loop,
    simulate_sinusoid_loop,
)
from tests.test_design import bisection_omega_f


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} - {name} ({detail})")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def rig():
    plant = default_plant()
    c_l = baseline_controller(plant)
    grid = default_grid()
    return plant, c_l, grid


@pytest.fixture(scope="module")
def addon(rig):
    plant, c_l, grid = rig
    return design_addon(plant.model, c_l, [NotchSpec(MODE_OMEGA, 1.0, 2.0)],
                        omega_l=50.0, a_rho=0.0, grid=grid, omega_res=OMEGA_RES)


def test_criterion_clegg_df_phase():
    """Clegg describing-function phase: -38.15 deg +- 0.1 deg at 5 frequencies."""
    t0 = time.time()
    worst = 0.0
    for w in np.geomspace(0.01, 100.0, 5):
        phase_deg = math.degrees(np.angle(hosidf_reset(clegg(), float(w), 1)))
        worst = max(worst, abs(phase_deg - (-38.15)))
    elapsed = time.time() - t0
    report("clegg-df-phase", worst <= 0.1 and elapsed < 1.0,
           f"max deviation {worst:.4f} deg, {elapsed:.2f}s")


def test_criterion_hosidf_oracle():
    """Formula harmonics vs FFT of the discrete simulation: < 2% of |H_1|
    for n = 1, 3, 5, over 12 random first-order reset configurations."""
    t0 = time.time()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for trial in range(12):
        omega_r = 10.0 ** rng.uniform(-1.5, 1.5)  # 3 decades
        a_rho = (-0.5, 0.0, 0.5)[trial % 3]
        el = gfore(omega_r, a_rho)
        for w in np.geomspace(omega_r / 5.0, 20.0 * omega_r, 20):
            rec = simulate_sinusoid_steady(el, float(w), samples_per_period=1024)
            h1 = abs(hosidf_reset(el, float(w), 1))
            for n in (1, 3, 5):
                err = abs(hosidf_reset(el, float(w), n) - rec.harmonic(n)) / h1
                worst = max(worst, err)
    elapsed = time.time() - t0
    report("hosidf-oracle", worst < 0.02 and elapsed < 120.0,
           f"worst |formula - fft|/|H1| = {worst * 100:.4f}%, {elapsed:.1f}s")


def test_criterion_cglp_gain_limits():
    """First-harmonic gain of 20 random designs is unity at both frequency
    extremes; closure identities hold to 1e-12."""
    t0 = time.time()
    rng = np.random.default_rng(77)
    worst_gain = 0.0
    worst_closure = 0.0
    for _ in range(20):
        wl = 10.0 ** rng.uniform(-2, 2)
        wf = wl * rng.uniform(1.01, 1e3)
        a_rho = rng.uniform(-0.8, 0.8)
        d = make_cglp(wl, wf, a_rho)
        lo = abs(cglp_hosidf(d, 1e-6 * wl, 1))
        hi = abs(cglp_hosidf(d, 1e6 * wf, 1))
        worst_gain = max(worst_gain, abs(lo - 1.0), abs(hi - 1.0))
        worst_closure = max(
            worst_closure,
            abs(d.k_c * (d.d_r + 1.0) - 1.0),
            abs(d.k_c * d.d_r * d.omega_f / d.omega_l - 1.0),
        )
    elapsed = time.time() - t0
    report("cglp-gain-limits",
           worst_gain <= 1e-6 and worst_closure <= 1e-12 and elapsed < 1.0,
           f"gain dev {worst_gain:.2e}, closure dev {worst_closure:.2e}, {elapsed:.2f}s")


def test_criterion_backward_solve_round_trip():
    """200 random targets: reconstructed phase < 1e-6 rad, corner above the
    lag frequency, and agreement with the scan+bisection oracle < 1e-6."""
    t0 = time.time()
    rng = np.random.default_rng(5150)
    worst_phase = 0.0
    worst_oracle = 0.0
    all_above = True
    for i in range(200):
        wl = 10.0 ** rng.uniform(-2, 2)
        a_rho = (-0.3, 0.0, 0.3)[i % 3]
        w_c = wl * rng.uniform(1.0, 20.0)
        theta = rng.uniform(0.05, 0.95) * theta_max(wl, a_rho, w_c)
        wf = solve_omega_f(wl, a_rho, PhaseTarget(w_c, theta))
        all_above &= wf >= wl
        got = theta_cglp(make_cglp(wl, wf, a_rho), w_c)
        worst_phase = max(worst_phase, abs(got - theta))
        if i % 10 == 0:  # the oracle is slow; 20 cross-checks
            wf_oracle = bisection_omega_f(wl, a_rho, w_c, theta)
            worst_oracle = max(worst_oracle, abs(wf - wf_oracle) / wf_oracle)
    elapsed = time.time() - t0
    report("backward-solve-round-trip",
           worst_phase < 1e-6 and all_above and worst_oracle < 1e-6 and elapsed < 10.0,
           f"phase err {worst_phase:.2e} rad, oracle dev {worst_oracle:.2e}, {elapsed:.1f}s")


def test_criterion_max_phase_limit():
    """50 random cases: the phase at corner 1e6*omega_l reaches the limit
    within 1e-3 rad and stays strictly below it at 100*omega_l."""
    t0 = time.time()
    rng = np.random.default_rng(31337)
    worst_gap = 0.0
    all_below = True
    for _ in range(50):
        wl = 10.0 ** rng.uniform(-2, 2)
        a_rho = rng.choice([-0.3, 0.0, 0.3])
        w = wl * rng.uniform(1.0, 20.0)
        t_m = theta_max(wl, a_rho, w)
        worst_gap = max(worst_gap, abs(theta_cglp(make_cglp(wl, 1e6 * wl, a_rho), w) - t_m))
        all_below &= theta_cglp(make_cglp(wl, 100.0 * wl, a_rho), w) < t_m
    elapsed = time.time() - t0
    report("max-phase-limit", worst_gap < 1e-3 and all_below and elapsed < 1.0,
           f"limit gap {worst_gap:.2e} rad, strictly below: {all_below}, {elapsed:.2f}s")


def test_criterion_closed_loop_oracle(addon):
    """Sensitivity harmonics vs FFT-extracted error harmonics of the
    simulated loop: < 5% for n = 1, 3 at 10 frequencies passing the
    two-resets check."""
    t0 = time.time()
    loop = addon.loop
    freqs = np.geomspace(2.0, 150.0, 10)
    rc = two_resets_check(loop, freqs, samples_per_period=800, n_periods=10,
                          max_periods=260)
    checked = 0
    worst = 0.0
    spp = 2048
    for point in rc:
        if not point.ok:
            continue
        w = point.omega
        ts = 2.0 * math.pi / (w * spp)
        pred, _ = sensitivity_harmonics_at(loop.with_comparison_mode(ts, 1), w)
        rec = simulate_sinusoid_loop(plant=loop.plant, element=loop.element,
                                     c1=loop.c1, c2=loop.c2, omega=w,
                                     samples_per_period=spp, n_periods=20)
        for n in (1, 3):
            err = abs(abs(pred[n]) - abs(rec.error_harmonic(n))) / abs(pred[n])
            worst = max(worst, err)
        checked += 1
    elapsed = time.time() - t0
    report("closed-loop-oracle",
           checked == 10 and worst < 0.05 and elapsed < 300.0,
           f"{checked}/10 frequencies, worst |S_n| error {worst * 100:.3f}%, {elapsed:.1f}s")


def test_criterion_linear_collapse(rig):
    """Identity reset values reproduce classical sensitivity: S_inf = |S|
    within 1e-9, zero improvement indicator, zero flat-curve integral."""
    t0 = time.time()
    plant, c_l, grid = rig
    loop = LoopConfig(plant=plant.model, element=identity_element(), c2=c_l)
    s_lin = linear_sensitivity_mag(plant.model, c_l, grid)
    curves = compute_sensitivity_curves(loop, grid, reference_mag=s_lin)
    worst = float(np.max(np.abs(curves.s_inf - s_lin)))
    delta_ok = bool(np.all(np.abs(curves.delta_s_pct) < 1e-9))
    flat = bode_integral(grid, np.ones_like(grid))
    elapsed = time.time() - t0
    report("linear-collapse",
           worst < 1e-9 and delta_ok and flat == 0.0 and elapsed < 5.0,
           f"max |S_inf - |S|| = {worst:.2e}, flat integral {flat:.1e}, {elapsed:.1f}s")


def test_criterion_design_workflow(addon):
    """The add-on design on the synthetic plant passes with at least a 25%
    sensitivity reduction at the targeted mode and both constraints met."""
    t0 = time.time()
    ok = (addon.verdict == "pass"
          and addon.delta_at_notches[MODE_OMEGA] <= -25.0
          and addon.report.ms_db <= 6.0
          and addon.report.mr_db <= 2.5)
    elapsed = time.time() - t0
    report("design-workflow", ok and elapsed < 60.0,
           f"verdict {addon.verdict}, delta_s({MODE_OMEGA:g}) = "
           f"{addon.delta_at_notches[MODE_OMEGA]:.1f}%, Ms {addon.report.ms_db:.2f} dB, "
           f"Mr {addon.report.mr_db:.2f} dB, {elapsed:.1f}s")


def test_criterion_time_domain_direction(rig, addon):
    """Paired runs with a triggered low-frequency disturbance: the add-on
    shortens the settling duration, lowers the stationary RMS, and cuts the
    mode-frequency PSD density by at least half."""
    t0 = time.time()
    plant, c_l, _ = rig
    fs = 500.0
    traj = make_trajectory(1.0, 0.5, 20.0, fs, bound=5e-4)
    dist = DisturbanceSpec(amplitude=20.0, omega=MODE_OMEGA, decay=0.3,
                           t_start=traj.t_r)

    def run(element, c1, c2):
        sim = simulate_closed_loop(plant=plant.model, element=element, c1=c1, c2=c2,
                                   r=traj.r, ts=1.0 / fs, disturbance=dist)
        metrics = settling_metrics(sim.t, sim.e, traj.regions[0], traj.bound)
        mask = (sim.t >= traj.t_r) & (sim.t <= traj.t_e)
        omega_psd, pxx = error_psd(sim.e[mask], fs)
        peak = float(pxx[int(np.argmin(np.abs(omega_psd - MODE_OMEGA)))])
        return metrics, peak

    base_m, base_peak = run(identity_element(), None, c_l)
    loop = addon.loop
    addon_m, addon_peak = run(loop.element, loop.c1, loop.c2)
    psd_drop = 100.0 * (base_peak - addon_peak) / base_peak
    ok = (addon_m.t_star < base_m.t_star
          and addon_m.rms < base_m.rms
          and psd_drop >= 50.0)
    elapsed = time.time() - t0
    report("time-domain-direction", ok and elapsed < 120.0,
           f"T* {base_m.t_star:.2f}->{addon_m.t_star:.2f}s, "
           f"RMS {base_m.rms:.2e}->{addon_m.rms:.2e}, PSD@mode -{psd_drop:.0f}%, "
           f"{elapsed:.1f}s")


def test_criterion_discrete_reset_surface():
    """The strict surface fires exactly once per crossing for the three
    canonical sequences."""
    t0 = time.time()
    counts = []
    for seq in ([1.0, -1.0], [1.0, 0.0, -1.0], [1.0, 0.0, 1.0]):
        state = discretize_reset(gfore(1.0, 0.0), 0.01)
        _, flags = run_sequence(state, seq)
        counts.append(int(np.sum(flags)))
    elapsed = time.time() - t0
    report("discrete-reset-surface", counts == [1, 1, 1] and elapsed < 1.0,
           f"reset counts {counts}, {elapsed:.2f}s")


def test_criterion_bode_integral_regression(addon, rig):
    """The reset design's log-sensitivity integral sits strictly below the
    linear controller's over the analysis span."""
    t0 = time.time()
    _, _, grid = rig
    lin = bode_integral(grid, addon.curves.s_lin_mag)
    rst = bode_integral(grid, addon.curves.s_inf)
    elapsed = time.time() - t0
    report("bode-integral-regression", rst < lin and elapsed < 10.0,
           f"reset {rst:.3f} < linear {lin:.3f}, {elapsed:.1f}s")
