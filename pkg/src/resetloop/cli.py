"""Command-line front end: analyze, design, simulate, serve."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import (
    DesignRequest,
    angles_to_degrees,
    load_project_config,
    parse_design_request,
    parse_sim_config,
)
from .errors import ConfigError, InfeasiblePhaseError, ResetLoopError
from .lti import NotchSpec
from .svgplot import LinePlot, db
from .workflows import analyze_linear, run_design, run_simulation

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def _parse_notch(text: str) -> NotchSpec:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"notch must be omega_n:Q1:Q2, got {text!r}")
    try:
        return NotchSpec(float(parts[0]), float(parts[1]), float(parts[2]))
    except (ValueError, ResetLoopError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resetloop",
        description="Design and analyze reset-based add-on filters for "
                    "existing linear motion controllers from frequency-response data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="project config JSON")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--deg", action="store_true",
                        help="report phase values in degrees alongside radians")

    p_an = sub.add_parser("analyze", parents=[common],
                          help="sensitivity/constraint analysis of the baseline "
                               "or of a stored design")
    p_an.add_argument("--design", help="design request JSON (omit for linear-only)")

    p_de = sub.add_parser("design", parents=[common],
                          help="run the add-on design procedure")
    p_de.add_argument("--notch", action="append", type=_parse_notch, default=[],
                      metavar="WN:Q1:Q2", help="inverse notch spec (repeatable)")
    p_de.add_argument("--omega-l", type=float, required=True)
    p_de.add_argument("--a-rho", type=float, default=0.0)
    p_de.add_argument("--c-f", type=float, default=1.0)
    p_de.add_argument("--omega-c", type=float, default=None,
                      help="crossover override (default: detected)")
    p_de.add_argument("--c1-notch", action="append", type=int, default=[],
                      metavar="INDEX", help="place this notch before the reset element")
    p_de.add_argument("--check-resets", action="store_true",
                      help="simulate the loop and verify two resets per cycle")

    p_si = sub.add_parser("simulate", parents=[common], help="time-domain runs")
    p_si.add_argument("--run", required=True, help="run config JSON")
    p_si.add_argument("--design", help="design request JSON (adds the add-on run)")

    p_sv = sub.add_parser("serve", parents=[common], help="local JSON service")
    p_sv.add_argument("--host", default="127.0.0.1")
    p_sv.add_argument("--port", type=int, default=8731)
    p_sv.add_argument("--sim-budget", type=float, default=30.0,
                      help="wall-clock budget per simulate request (seconds)")
    p_sv.add_argument("--studio", default=None,
                      help="serve the built design studio from this directory")
    return parser


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError("file not found", context=path) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", context=path) from exc


def _write_json(payload: dict, path: Path, deg: bool) -> None:
    out = dict(payload)
    for key in ("theta_required", "theta_available"):
        if deg and isinstance(out.get(key), (int, float)):
            out[key + "_deg"] = math.degrees(out[key])
    out["report"] = angles_to_degrees(out.get("report"), deg)
    with open(path, "w", encoding="ascii") as fh:
        json.dump(out, fh, indent=2)


def _emit_plots(payload: dict, out_dir: Path) -> None:
    curves = payload.get("curves")
    if curves:
        omega = np.asarray(curves["omega"])
        plot = LinePlot("sensitivity: linear vs worst-case reset",
                        "omega (rad/s)", "magnitude (dB)")
        plot.add(omega, db(curves["s_lin_mag"]), "|S| linear", dashed=True)
        plot.add(omega, db(curves["s_inf"]), "|S_inf| reset")
        plot.write(out_dir / "sensitivity.svg")

        delta = np.asarray([(np.nan if v is None else v) for v in curves["delta_s_pct"]])
        LinePlot("sensitivity improvement indicator", "omega (rad/s)",
                 "delta_s (%)").add(omega, delta, "delta_s").write(out_dir / "delta_s.svg")
    df = payload.get("df")
    if df:
        omega = np.asarray(df["omega"])
        bode = LinePlot("filter describing functions", "omega (rad/s)", "magnitude (dB)")
        bode.add(omega, db(df["c1_mag"]), "first harmonic")
        bode.add(omega, db(np.maximum(df["c3_mag"], 1e-300)), "third harmonic", dashed=True)
        bode.write(out_dir / "df_bode.svg")
        LinePlot("third-over-first harmonic ratio", "omega (rad/s)",
                 "ratio (%)").add(omega, df["harmonic_ratio_pct"],
                                  "100*|c3|/|c1|").write(out_dir / "harmonic_ratio.svg")


def cmd_analyze(args) -> int:
    config = load_project_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.design:
        request = parse_design_request(_load_json(args.design))
        payload, result = run_design(config, request)
        curves = result.curves
    else:
        payload, curves = analyze_linear(config, with_curves=True)
    _write_json(payload, out_dir / "report.json", args.deg)
    curves.write_csv(out_dir / "curves.csv")
    _emit_plots(payload, out_dir)
    print(f"verdict: {payload['verdict']}  (Ms {payload['report']['Ms_db']:.2f} dB, "
          f"Mr {payload['report']['Mr_db']:.2f} dB)")
    print(f"outputs in {out_dir}/")
    return EXIT_OK


def cmd_design(args) -> int:
    config = load_project_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    request = DesignRequest(
        notches=tuple(args.notch),
        omega_l=args.omega_l,
        a_rho=args.a_rho,
        c_f=args.c_f,
        omega_c=args.omega_c,
        c1_notch_indices=tuple(args.c1_notch),
        check_resets=args.check_resets,
    )
    try:
        payload, result = run_design(config, request)
    except InfeasiblePhaseError as exc:
        theta_max_deg = math.degrees(exc.theta_max)
        print(f"infeasible design: requested phase {math.degrees(exc.theta):.3f} deg at "
              f"omega={exc.omega:.6g} rad/s exceeds the achievable "
              f"{theta_max_deg:.3f} deg; soften the gain filter or move omega_l",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    _write_json(payload, out_dir / "report.json", args.deg)
    if payload["design"] is not None:
        with open(out_dir / "design.json", "w", encoding="ascii") as fh:
            json.dump(payload["design"], fh, indent=2)
    result.curves.write_csv(out_dir / "curves.csv")
    _emit_plots(payload, out_dir)
    print(f"verdict: {payload['verdict']}")
    for entry in payload["delta_at_notches"]:
        print(f"  delta_s({entry['omega_n']:g} rad/s) = {entry['delta_s_pct']:.1f}%")
    print(f"  Ms {payload['report']['Ms_db']:.2f} dB (limit "
          f"{payload['report']['Ms_limit_db']:g}), Mr {payload['report']['Mr_db']:.2f} dB "
          f"(limit {payload['report']['Mr_limit_db']:g})")
    print(f"outputs in {out_dir}/")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = load_project_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sim_cfg = parse_sim_config(_load_json(args.run))
    request = parse_design_request(_load_json(args.design)) if args.design else None
    payload, traces = run_simulation(config, sim_cfg, request)
    _write_json(payload, out_dir / "metrics.json", args.deg)
    for name, sim in traces.items():
        if hasattr(sim, "write_csv"):
            sim.write_csv(out_dir / f"trace_{name}.csv")
    if payload.get("comparison"):
        comp = payload["comparison"]
        print("paired run (add-on vs baseline):")
        for key, label in (("t_star_change_pct", "T*"), ("rms_change_pct", "RMS"),
                           ("psd_at_mode_change_pct", "PSD@mode")):
            val = comp.get(key)
            print(f"  {label:9s} {'n/a' if val is None else f'{val:+.1f}%'}")
    else:
        print(json.dumps(payload, indent=2))
    print(f"outputs in {out_dir}/")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    config = load_project_config(args.config)
    serve(config, host=args.host, port=args.port, sim_budget_s=args.sim_budget,
          studio_dir=args.studio)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "analyze": cmd_analyze,
        "design": cmd_design,
        "simulate": cmd_simulate,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ResetLoopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
