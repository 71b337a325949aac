"""Shared analysis/design/simulation workflows.

The CLI and the HTTP service both call these, so the two front ends emit
identical numbers for identical inputs.
"""

from __future__ import annotations

import math
import numpy as np

from .closedloop import (
    AddonDesignResult,
    LoopConfig,
    compute_sensitivity_curves,
    design_addon,
    linear_sensitivity_mag,
    robustness_check,
)
from .config import DesignRequest, ProjectConfig, SCHEMA_VERSION, SimRunConfig
from .design import CglpDesign
from .errors import ConfigError
from .harmonics import cglp_hosidf
from .lti import RationalTf, make_inverse_notch, UNITY
from .reset import identity_element
from .sim import (
    DisturbanceSpec,
    SyntheticPlant,
    error_psd,
    make_trajectory,
    settling_metrics,
    simulate_closed_loop,
    simulate_sinusoid_loop,
)


def _curves_payload(curves) -> dict:
    return {
        "omega": [float(w) for w in curves.omega],
        "s_lin_mag": [float(v) for v in curves.s_lin_mag],
        "s_inf": [float(v) for v in curves.s_inf],
        "delta_s_pct": [None if not math.isfinite(v) else float(v)
                        for v in curves.delta_s_pct],
        "truncated": [bool(v) for v in curves.truncated],
    }


def _df_payload(design: CglpDesign, grid) -> dict:
    c1 = np.array([cglp_hosidf(design, float(w), 1) for w in grid])
    c3 = np.array([cglp_hosidf(design, float(w), 3) for w in grid])
    ratio = 100.0 * np.abs(c3) / np.abs(c1)
    return {
        "omega": [float(w) for w in grid],
        "c1_mag": [float(v) for v in np.abs(c1)],
        "c1_phase": [float(v) for v in np.angle(c1)],
        "c3_mag": [float(v) for v in np.abs(c3)],
        "harmonic_ratio_pct": [float(v) for v in ratio],
    }


def analyze_linear(config: ProjectConfig, with_curves: bool = False):
    """Sensitivity and constraint report of the baseline controller alone.

    Returns the JSON payload; with ``with_curves`` also the curve container
    (for CSV emission).
    """
    plant = config.plant_for_analysis()
    grid = config.grid.build()
    s_lin = linear_sensitivity_mag(plant, config.baseline, grid)
    report = robustness_check(grid, s_lin, config.omega_res,
                              config.thresholds.ms_db, config.thresholds.mr_db)
    loop = LoopConfig(plant=plant, element=identity_element(), c2=config.baseline,
                      n_max=1, r0=config.r0)
    curves = compute_sensitivity_curves(loop, grid, reference_mag=s_lin)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "linear-analysis",
        "report": report.to_json_dict(),
        "verdict": "pass" if report.passed else "fail",
        "curves": _curves_payload(curves),
        "design": None,
        "df": None,
        "theta_required": None,
        "theta_available": None,
        "omega_c": None,
        "delta_at_notches": [],
        "reset_check": None,
    }
    if with_curves:
        return payload, curves
    return payload


def run_design(config: ProjectConfig, request: DesignRequest) -> tuple[dict, AddonDesignResult]:
    """The full add-on design workflow on the configured plant/baseline."""
    plant_obj = config.load_plant()
    plant = plant_obj.model if isinstance(plant_obj, SyntheticPlant) else plant_obj
    grid = config.grid.build()
    result = design_addon(
        plant, config.baseline, list(request.notches), request.omega_l, request.a_rho,
        omega_c=request.omega_c, c_f=request.c_f, grid=grid,
        omega_res=config.omega_res, n_max=config.n_max,
        ms_limit_db=config.thresholds.ms_db, mr_limit_db=config.thresholds.mr_db,
        delta_s_max=config.thresholds.delta_s_pct,
        c1_notch_indices=request.c1_notch_indices, r0=config.r0,
        check_resets=request.check_resets and isinstance(plant_obj, (SyntheticPlant, RationalTf)),
    )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "design",
        "design": result.design.to_json_dict() if result.design else None,
        "theta_required": result.theta_required,
        "theta_available": result.theta_available,
        "omega_c": result.omega_c,
        "verdict": result.verdict,
        "report": result.report.to_json_dict(),
        "delta_at_notches": [
            {"omega_n": w, "delta_s_pct": d} for w, d in result.delta_at_notches.items()
        ],
        "curves": _curves_payload(result.curves),
        "df": _df_payload(result.design, result.curves.omega) if result.design else None,
        "reset_check": None if result.reset_check is None else [
            {"omega": p.omega, "resets_per_period": p.resets_per_period, "ok": p.ok}
            for p in result.reset_check
        ],
    }
    return payload, result


def _addon_blocks(config: ProjectConfig, design: CglpDesign, request: DesignRequest):
    """(element, c1, c2) of the assembled add-on loop for time simulation."""
    notch_tfs = [make_inverse_notch(n) for n in request.notches]
    c1 = UNITY
    c2 = design.k_c * design.lead_tf()
    for i, tf in enumerate(notch_tfs):
        if i in request.c1_notch_indices:
            c1 = c1 * tf
        else:
            c2 = c2 * tf
    c2 = c2 * config.baseline
    return design.reset_element(), (None if c1 is UNITY else c1), c2


def _metrics_payload(metrics, psd_peak: float | None) -> dict:
    out = {
        "t_star": metrics.t_star,
        "t_s": metrics.t_s,
        "t_r": metrics.t_r,
        "t_e": metrics.t_e,
        "rms": metrics.rms,
        "settled": metrics.settled,
        "bound": metrics.bound,
    }
    if psd_peak is not None:
        out["psd_at_mode"] = psd_peak
    return out


def run_simulation(
    config: ProjectConfig,
    sim_cfg: SimRunConfig,
    request: DesignRequest | None = None,
    *,
    wall_budget_s: float | None = None,
) -> tuple[dict, dict]:
    """Run the configured simulation; returns (payload, traces).

    Trajectory mode always runs the baseline; with a design request it runs
    the add-on loop too and reports the paired improvement percentages.
    Sinusoid mode runs whichever loop is requested and reports the
    steady-state error harmonics.
    """
    plant_obj = config.load_plant()
    if not isinstance(plant_obj, SyntheticPlant):
        raise ConfigError("simulation requires a synthetic (parametric) plant",
                          context="plant")
    plant = plant_obj.model

    design_result = None
    blocks = None
    if request is not None:
        payload, design_result = run_design(config, request)
        if design_result.design is None:
            raise ConfigError("design request produced no filter (no notches)",
                              context="simulate")
        blocks = _addon_blocks(config, design_result.design, request)

    if sim_cfg.mode == "sinusoid":
        if blocks is not None:
            element, c1, c2 = blocks
        else:
            element, c1, c2 = identity_element(), None, config.baseline
        rec = simulate_sinusoid_loop(
            plant=plant, element=element, c1=c1, c2=c2, omega=sim_cfg.omega,
            r0=sim_cfg.r0, samples_per_period=sim_cfg.samples_per_period,
            wall_budget_s=wall_budget_s,
        )
        harmonics = {}
        for n in (1, 3, 5):
            h = rec.error_harmonic(n)
            harmonics[str(n)] = {"re": h.real, "im": h.imag, "mag": abs(h)}
        payload = {
            "schema_version": SCHEMA_VERSION,
            "kind": "sinusoid-run",
            "omega": rec.omega,
            "resets_per_period": rec.resets_per_period,
            "periods_run": rec.periods_run,
            "residual": rec.residual,
            "jitter_limited": rec.jitter_limited,
            "error_harmonics": harmonics,
        }
        traces = {"t": rec.ts * np.arange(rec.e.size), "e": rec.e,
                  "e_r": rec.e_r, "reset_flags": rec.reset_flags}
        return payload, traces

    # trajectory mode
    fs = 1.0 / sim_cfg.ts
    traj = make_trajectory(sim_cfg.distance, sim_cfg.move_duration,
                           sim_cfg.hold_duration, fs, bound=sim_cfg.bound,
                           backward=sim_cfg.backward)
    dist_obj = dict(sim_cfg.disturbance)
    if dist_obj.get("t_start") == "t_r":
        dist_obj["t_start"] = traj.t_r
    dist_obj.setdefault("seed", sim_cfg.seed)
    disturbance = DisturbanceSpec(**dist_obj)

    def one_run(element, c1, c2):
        sim = simulate_closed_loop(
            plant=plant, element=element, c1=c1, c2=c2, r=traj.r, ts=sim_cfg.ts,
            disturbance=disturbance, wall_budget_s=wall_budget_s,
        )
        metrics = settling_metrics(sim.t, sim.e, traj.regions[0], traj.bound)
        psd_peak = None
        mask = (sim.t >= traj.t_r) & (sim.t <= traj.t_e)
        if int(np.sum(mask)) >= 256:
            w_psd, p_psd = error_psd(sim.e[mask], fs)
            i_mode = int(np.argmin(np.abs(w_psd - plant_obj.mode_omega)))
            psd_peak = float(p_psd[i_mode])
        return sim, metrics, psd_peak

    base_sim, base_metrics, base_peak = one_run(identity_element(), None, config.baseline)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "trajectory-run",
        "baseline": _metrics_payload(base_metrics, base_peak),
        "addon": None,
        "comparison": None,
    }
    traces = {"baseline": base_sim}
    if blocks is not None:
        element, c1, c2 = blocks
        addon_sim, addon_metrics, addon_peak = one_run(element, c1, c2)
        payload["addon"] = _metrics_payload(addon_metrics, addon_peak)

        def pct(new: float, old: float) -> float | None:
            if old == 0:
                return None
            return 100.0 * (new - old) / old

        payload["comparison"] = {
            "t_star_change_pct": pct(addon_metrics.t_star, base_metrics.t_star),
            "rms_change_pct": pct(addon_metrics.rms, base_metrics.rms),
            "psd_at_mode_change_pct": (
                None if base_peak is None or addon_peak is None
                else pct(addon_peak, base_peak)
            ),
        }
        traces["addon"] = addon_sim
    return payload, traces
