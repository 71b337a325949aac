"""Project and run configuration: JSON schemas shared by the CLI and the
HTTP service."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .lti import NotchSpec, RationalTf, read_frf_csv
from .sim import SyntheticPlant, synthetic_plant
from .util import log_grid

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class GridSpec:
    omega_min: float
    omega_max: float
    points_per_decade: int = 24

    def build(self) -> np.ndarray:
        try:
            return log_grid(self.omega_min, self.omega_max, self.points_per_decade)
        except ValueError as exc:
            raise ConfigError(str(exc), context="grid") from exc


@dataclass(frozen=True)
class Thresholds:
    ms_db: float = 6.0
    mr_db: float = 2.5
    delta_s_pct: float = 0.0  # required improvement ceiling at each notch center

    def __post_init__(self):
        if self.ms_db <= 0 or self.mr_db <= 0:
            raise ConfigError("dB thresholds must be positive", context="thresholds")


@dataclass(frozen=True)
class ProjectConfig:
    """Everything the analyze/design commands need: plant source, baseline
    controller, analysis grid, harmonic cap, thresholds and split frequency."""

    plant_source: dict            # {"synthetic": id, ...kwargs} | {"frf_csv": path}
    baseline: RationalTf
    grid: GridSpec
    omega_res: float
    n_max: int = 39
    thresholds: Thresholds = field(default_factory=Thresholds)
    r0: float = 1.0
    base_dir: Path = Path(".")

    def load_plant(self):
        src = self.plant_source
        if "synthetic" in src:
            kwargs = {k: v for k, v in src.items() if k != "synthetic"}
            return synthetic_plant(src["synthetic"], **kwargs)
        if "frf_csv" in src:
            path = Path(src["frf_csv"])
            if not path.is_absolute():
                path = self.base_dir / path
            return read_frf_csv(path)
        raise ConfigError("plant must give 'synthetic' or 'frf_csv'", context="plant")

    def plant_for_analysis(self):
        plant = self.load_plant()
        return plant.model if isinstance(plant, SyntheticPlant) else plant

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "plant": dict(self.plant_source),
            "baseline_controller": self.baseline.to_json_dict(),
            "grid": {
                "omega_min": self.grid.omega_min,
                "omega_max": self.grid.omega_max,
                "points_per_decade": self.grid.points_per_decade,
            },
            "omega_res": self.omega_res,
            "n_max": self.n_max,
            "thresholds": {
                "ms_db": self.thresholds.ms_db,
                "mr_db": self.thresholds.mr_db,
                "delta_s_pct": self.thresholds.delta_s_pct,
            },
            "r0": self.r0,
        }


def _require(obj: dict, key: str, context: str):
    if key not in obj:
        raise ConfigError(f"missing required field {key!r}", context=context)
    return obj[key]


def parse_project_config(obj: dict, base_dir: Path = Path(".")) -> ProjectConfig:
    if not isinstance(obj, dict):
        raise ConfigError("top-level config must be a JSON object")
    plant = _require(obj, "plant", "config")
    if not isinstance(plant, dict):
        raise ConfigError("plant must be an object", context="plant")
    ctl = _require(obj, "baseline_controller", "config")
    baseline = RationalTf.from_json_dict(ctl)
    grid_obj = _require(obj, "grid", "config")
    try:
        grid = GridSpec(
            float(_require(grid_obj, "omega_min", "grid")),
            float(_require(grid_obj, "omega_max", "grid")),
            int(grid_obj.get("points_per_decade", 24)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid numbers: {exc}", context="grid") from exc
    grid.build()  # fail fast on an unusable grid spec
    thr_obj = obj.get("thresholds", {})
    thresholds = Thresholds(
        float(thr_obj.get("ms_db", 6.0)),
        float(thr_obj.get("mr_db", 2.5)),
        float(thr_obj.get("delta_s_pct", 0.0)),
    )
    omega_res = float(_require(obj, "omega_res", "config"))
    if not (grid.omega_min < omega_res < grid.omega_max):
        raise ConfigError(
            f"omega_res={omega_res} must lie inside the grid "
            f"({grid.omega_min}, {grid.omega_max})", context="omega_res")
    n_max = int(obj.get("n_max", 39))
    if n_max < 1:
        raise ConfigError("n_max must be >= 1", context="n_max")
    return ProjectConfig(
        plant_source=plant, baseline=baseline, grid=grid, omega_res=omega_res,
        n_max=n_max, thresholds=thresholds, r0=float(obj.get("r0", 1.0)),
        base_dir=base_dir,
    )


def load_project_config(path) -> ProjectConfig:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config file not found", context=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", context=str(path)) from exc
    return parse_project_config(obj, base_dir=path.parent)


# ---------------------------------------------------------------------------
# design request (CLI options / POST /design body)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DesignRequest:
    notches: tuple[NotchSpec, ...]
    omega_l: float
    a_rho: float
    c_f: float = 1.0
    omega_c: float | None = None
    c1_notch_indices: tuple[int, ...] = ()
    check_resets: bool = False


def parse_design_request(obj: dict) -> DesignRequest:
    notches_raw = _require(obj, "notches", "design")
    if not isinstance(notches_raw, list):
        raise ConfigError("notches must be a list", context="design.notches")
    notches = tuple(NotchSpec.from_json_dict(n) for n in notches_raw)
    try:
        omega_l = float(_require(obj, "omega_l", "design"))
        a_rho = float(_require(obj, "a_rho", "design"))
        c_f = float(obj.get("c_f", 1.0))
        omega_c = obj.get("omega_c")
        omega_c = None if omega_c is None else float(omega_c)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad design numbers: {exc}", context="design") from exc
    c1_idx = tuple(int(i) for i in obj.get("c1_notch_indices", []))
    for i in c1_idx:
        if not (0 <= i < len(notches)):
            raise ConfigError(f"c1_notch_indices entry {i} out of range", context="design")
    return DesignRequest(notches, omega_l, a_rho, c_f, omega_c, c1_idx,
                         bool(obj.get("check_resets", False)))


# ---------------------------------------------------------------------------
# simulation run config
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimRunConfig:
    """Either a trajectory run (baseline vs add-on comparison) or a
    sinusoid oracle run."""

    mode: str                      # "trajectory" | "sinusoid"
    ts: float
    # trajectory mode
    distance: float = 1.0
    move_duration: float = 0.5
    hold_duration: float = 20.0
    bound: float = 5e-4
    backward: bool = False
    disturbance: dict = field(default_factory=dict)
    # sinusoid mode
    omega: float = 1.0
    r0: float = 1.0
    samples_per_period: int = 1024
    seed: int = 0


def parse_sim_config(obj: dict) -> SimRunConfig:
    mode = _require(obj, "mode", "simulate")
    if mode not in ("trajectory", "sinusoid"):
        raise ConfigError(f"mode must be 'trajectory' or 'sinusoid', got {mode!r}",
                          context="simulate")
    try:
        if mode == "trajectory":
            return SimRunConfig(
                mode=mode,
                ts=float(_require(obj, "ts", "simulate")),
                distance=float(obj.get("distance", 1.0)),
                move_duration=float(obj.get("move_duration", 0.5)),
                hold_duration=float(obj.get("hold_duration", 20.0)),
                bound=float(_require(obj, "bound", "simulate")),
                backward=bool(obj.get("backward", False)),
                disturbance=dict(obj.get("disturbance", {})),
                seed=int(obj.get("seed", 0)),
            )
        return SimRunConfig(
            mode=mode,
            ts=0.0,  # derived from omega and samples_per_period
            omega=float(_require(obj, "omega", "simulate")),
            r0=float(obj.get("r0", 1.0)),
            samples_per_period=int(obj.get("samples_per_period", 1024)),
            seed=int(obj.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad simulate numbers: {exc}", context="simulate") from exc


def angles_to_degrees(obj, enabled: bool):
    """Append *_deg companions next to radian phase fields in a report dict."""
    if not enabled or not isinstance(obj, dict):
        return obj
    out = dict(obj)
    for key, val in obj.items():
        if key.startswith("theta") and isinstance(val, (int, float)) and math.isfinite(val):
            out[key + "_deg"] = math.degrees(val)
    return out
