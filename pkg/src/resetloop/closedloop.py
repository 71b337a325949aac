"""Closed-loop frequency-domain prediction for reset control loops.

Sensitivity harmonics, worst-case-over-period pseudo-sensitivity, the
sensitivity improvement indicator against a pure-linear reference, the
robustness constraints (peak below / at-and-above the configured split
frequency), the Bode sensitivity integral, the two-resets-per-cycle
simulation check, and the full add-on design procedure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .design import CglpDesign, PhaseTarget, make_cglp, solve_omega_f, theta_max
from .errors import (
    FrfRangeError,
    NearSingularLoopError,
    NonConvergenceError,
    ValidationError,
)
from .harmonics import odd_harmonics, open_loop_harmonic
from .lti import (
    UNITY,
    FrfTable,
    NotchSpec,
    RationalTf,
    eval_tf,
    interp_frf,
    make_inverse_notch,
    tustin_sos,
)
from .reset import ResetElement, bls_tf, identity_element
from .sim import simulate_sinusoid_loop
from .util import parallel_map

# |1 + L_1| below this means the loop sits at the instability boundary
LOOP_SINGULARITY_GUARD = 1e-9
# phase samples per period for the worst-case error search (harmonic 39
# still gets > 52 samples per cycle; max-search error < 0.2 %)
PHASE_SAMPLES = 2048


@dataclass(frozen=True)
class LoopConfig:
    """The closed-loop topology e -> C1 -> R -> C2 -> G with evaluation options.

    ``ts``/``delay_samples`` enable the simulation-comparison mode: linear
    blocks are evaluated as their Tustin-discretized responses and the
    one-sample loop closure of the time simulator is mirrored as a delay on
    the plant. Both default to pure continuous evaluation for design work.
    """

    plant: object                    # FrfTable | RationalTf
    element: ResetElement
    c1: RationalTf | None = None
    c2: RationalTf | None = None
    n_max: int = 39
    r0: float = 1.0
    ts: float | None = None
    delay_samples: int = 0

    def __post_init__(self):
        if self.n_max < 1:
            raise ValidationError("n_max must be >= 1")
        if self.delay_samples and self.ts is None:
            raise ValidationError("delay_samples requires ts")

    def with_comparison_mode(self, ts: float, delay_samples: int = 1) -> "LoopConfig":
        return replace(self, ts=ts, delay_samples=delay_samples)

    # -- block evaluators ---------------------------------------------------

    def _tf_evaluator(self, tf: RationalTf | None):
        if tf is None:
            return lambda nu: 1.0 + 0.0j
        if self.ts is None:
            return lambda nu: eval_tf(tf, nu)
        disc = tustin_sos(tf, self.ts)  # matches the simulator's biquad cascade
        return disc.freq_response

    def eval_c1(self, nu: float) -> complex:
        return self._c1_eval(nu)

    def eval_c2(self, nu: float) -> complex:
        return self._c2_eval(nu)

    def eval_plant(self, nu: float) -> complex:
        """Plant response; raises FrfRangeError outside a measured band."""
        return self._g_eval(nu)

    def eval_bls(self, nu: float) -> complex:
        """Base-linear open loop L_bl at frequency nu."""
        return self.eval_c1(nu) * self._r_eval(nu) * self.eval_c2(nu) * self.eval_plant(nu)

    def __getattr__(self, name):
        # evaluator closures built lazily once per config
        if name in ("_c1_eval", "_c2_eval", "_g_eval", "_r_eval"):
            object.__setattr__(self, "_c1_eval", self._tf_evaluator(self.c1))
            object.__setattr__(self, "_c2_eval", self._tf_evaluator(self.c2))
            object.__setattr__(self, "_g_eval", self._plant_evaluator())
            object.__setattr__(self, "_r_eval", self._tf_evaluator(bls_tf(self.element)))
            return object.__getattribute__(self, name)
        raise AttributeError(name)

    def _plant_evaluator(self):
        plant = self.plant
        if isinstance(plant, FrfTable):
            base = lambda nu: interp_frf(plant, nu)
        elif isinstance(plant, RationalTf):
            base = self._tf_evaluator(plant)
        elif hasattr(plant, "model"):
            base = self._tf_evaluator(plant.model)
        else:
            raise ValidationError(f"unsupported plant type {type(plant)!r}")
        if self.delay_samples:
            lag = self.delay_samples * self.ts
            return lambda nu: base(nu) * np.exp(-1j * nu * lag)
        return base


def _first_harmonic_sensitivity(loop: LoopConfig, omega: float) -> complex:
    l1, _ = open_loop_harmonic(loop, omega, 1)
    denom = 1.0 + l1
    if abs(denom) < LOOP_SINGULARITY_GUARD:
        raise NearSingularLoopError(omega, abs(denom))
    return 1.0 / denom


def sensitivity_harmonics_at(loop: LoopConfig, omega: float) -> tuple[dict[int, complex], bool]:
    """All odd sensitivity harmonics S_n at one frequency.

    Returns ({n: S_n}, truncated): harmonics whose plant query left the
    measured band are dropped (flagged), consistent with treating the
    missing contribution as zero.
    """
    s1 = _first_harmonic_sensitivity(loop, omega)
    out = {1: s1}
    truncated = False
    mag_s1 = abs(s1)
    ang_s1 = np.angle(s1)
    for n in odd_harmonics(loop.n_max)[1:]:
        ln, trunc_l = open_loop_harmonic(loop, omega, n)
        if trunc_l:
            truncated = True
            continue
        try:
            l_bl = loop.eval_bls(n * omega)
        except FrfRangeError:
            truncated = True
            continue
        s_bl = 1.0 / (1.0 + l_bl)
        out[n] = complex(-ln * s_bl * (mag_s1 * np.exp(1j * n * ang_s1)))
    return out, truncated


def sensitivity_harmonic(loop: LoopConfig, omega: float, n: int) -> complex:
    """Single closed-loop sensitivity harmonic (even n is exactly zero)."""
    if n % 2 == 0:
        return 0.0 + 0.0j
    if n == 1:
        return _first_harmonic_sensitivity(loop, omega)
    s1 = _first_harmonic_sensitivity(loop, omega)
    ln, truncated = open_loop_harmonic(loop, omega, n)
    if truncated:
        return 0.0 + 0.0j
    l_bl = loop.eval_bls(n * omega)
    return complex(-ln / (1.0 + l_bl) * (abs(s1) * np.exp(1j * n * np.angle(s1))))


def _worst_case_error(s_n: dict[int, complex], phase_samples: int = PHASE_SAMPLES):
    """(signed max, abs max) over one period of the reconstructed
    steady-state error per unit reference amplitude.

    With the higher harmonics negligible the max of a single sinusoid is its
    magnitude, exactly; otherwise the period is sampled on the phase grid.
    """
    higher = sum(abs(s) for n, s in s_n.items() if n >= 3)
    mag1 = abs(s_n.get(1, 0.0))
    if higher < 1e-12:
        return mag1, mag1
    theta = np.linspace(0.0, 2.0 * np.pi, phase_samples, endpoint=False)
    e = np.zeros_like(theta)
    for n, s in s_n.items():
        e += abs(s) * np.sin(n * theta + np.angle(s))
    return float(np.max(e)), float(np.max(np.abs(e)))


def pseudo_sensitivity(loop: LoopConfig, omega: float) -> float:
    """Worst-case steady-state error over one period per unit sinusoidal
    reference, built from the sensitivity harmonics."""
    s_n, _ = sensitivity_harmonics_at(loop, omega)
    signed, _abs = _worst_case_error(s_n)
    return signed


# ---------------------------------------------------------------------------
# curves over a grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensitivityCurves:
    omega: np.ndarray
    s_lin_mag: np.ndarray           # |S| of the pure-linear reference controller
    harmonics: tuple[int, ...]
    s_n: np.ndarray                 # (n_w, n_h) complex; NaN where dropped
    s_inf: np.ndarray
    delta_s_pct: np.ndarray         # NaN where |S| = 0
    truncated: np.ndarray           # (n_w,) bool

    def write_csv(self, path) -> None:
        cols = ["omega", "S_lin_mag"]
        for n in self.harmonics:
            cols += [f"S{n}_re", f"S{n}_im"]
        cols += ["S_inf", "delta_s_pct", "truncated"]
        with open(path, "w", encoding="ascii") as fh:
            fh.write(",".join(cols) + "\n")
            for i in range(self.omega.size):
                row = [repr(float(self.omega[i])), repr(float(self.s_lin_mag[i]))]
                for j in range(len(self.harmonics)):
                    v = self.s_n[i, j]
                    row += [repr(float(v.real)), repr(float(v.imag))]
                row += [repr(float(self.s_inf[i])), repr(float(self.delta_s_pct[i])),
                        str(int(self.truncated[i]))]
                fh.write(",".join(row) + "\n")


def read_curves_csv(path) -> SensitivityCurves:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    harmonics = tuple(
        int(c[1:-3]) for c in header if c.startswith("S") and c.endswith("_re")
    )
    data = np.array([[float(x) for x in row] for row in rows])
    col = {name: i for i, name in enumerate(header)}
    s_n = np.empty((data.shape[0], len(harmonics)), dtype=complex)
    for j, n in enumerate(harmonics):
        s_n[:, j] = data[:, col[f"S{n}_re"]] + 1j * data[:, col[f"S{n}_im"]]
    return SensitivityCurves(
        omega=data[:, col["omega"]],
        s_lin_mag=data[:, col["S_lin_mag"]],
        harmonics=harmonics,
        s_n=s_n,
        s_inf=data[:, col["S_inf"]],
        delta_s_pct=data[:, col["delta_s_pct"]],
        truncated=data[:, col["truncated"]].astype(bool),
    )


def improvement_indicator(s_lin_mag: np.ndarray, s_inf: np.ndarray) -> np.ndarray:
    """Percent change of the worst-case sensitivity against the linear
    reference; undefined (NaN) where the reference is zero."""
    s_lin = np.asarray(s_lin_mag, dtype=float)
    s_inf = np.asarray(s_inf, dtype=float)
    if s_lin.shape != s_inf.shape:
        raise ValidationError("curves must share one frequency grid")
    out = np.full(s_lin.shape, np.nan)
    ok = s_lin > 0.0
    out[ok] = 100.0 * (s_inf[ok] - s_lin[ok]) / s_lin[ok]
    return out


def linear_sensitivity_mag(plant, c_l: RationalTf, omega_grid, ts: float | None = None,
                           delay_samples: int = 0) -> np.ndarray:
    """|S| of the reference linear loop 1/(1 + C_L G) on a grid."""
    ref_loop = LoopConfig(plant=plant, element=identity_element(), c2=c_l,
                          n_max=1, ts=ts, delay_samples=delay_samples)
    out = np.empty(len(omega_grid))
    for i, w in enumerate(omega_grid):
        out[i] = abs(_first_harmonic_sensitivity(ref_loop, float(w)))
    return out


def compute_sensitivity_curves(
    loop: LoopConfig,
    omega_grid,
    *,
    reference_controller: RationalTf | None = None,
    reference_mag: np.ndarray | None = None,
) -> SensitivityCurves:
    """Sensitivity harmonics, pseudo-sensitivity and improvement indicator
    over a frequency grid (parallel-map contract per point)."""
    grid = np.asarray(omega_grid, dtype=float)
    if reference_mag is not None:
        s_lin = np.asarray(reference_mag, dtype=float)
        if s_lin.shape != grid.shape:
            raise ValidationError("reference_mag must match the grid")
    elif reference_controller is not None:
        s_lin = linear_sensitivity_mag(loop.plant, reference_controller, grid,
                                       ts=loop.ts, delay_samples=loop.delay_samples)
    else:
        raise ValidationError("need reference_controller or reference_mag")

    harmonics = odd_harmonics(loop.n_max)
    h_index = {n: j for j, n in enumerate(harmonics)}

    def point(w: float):
        s_n, truncated = sensitivity_harmonics_at(loop, float(w))
        signed, _ = _worst_case_error(s_n)
        return s_n, truncated, signed

    results = parallel_map(point, list(grid))
    s_matrix = np.full((grid.size, len(harmonics)), np.nan + 0j, dtype=complex)
    s_inf = np.empty(grid.size)
    trunc = np.zeros(grid.size, dtype=bool)
    for i, (s_n, truncated, signed) in enumerate(results):
        for n, v in s_n.items():
            s_matrix[i, h_index[n]] = v
        s_inf[i] = signed
        trunc[i] = truncated
    delta = improvement_indicator(s_lin, s_inf)
    return SensitivityCurves(grid, s_lin, harmonics, s_matrix, s_inf, delta, trunc)


# ---------------------------------------------------------------------------
# robustness constraints and integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RobustnessReport:
    ms_db: float
    mr_db: float
    omega_res: float
    ms_limit_db: float
    mr_limit_db: float
    ms_pass: bool
    mr_pass: bool
    modulus_margin: float  # 1 / max|S| below omega_res, linear scale

    @property
    def passed(self) -> bool:
        return self.ms_pass and self.mr_pass

    def to_json_dict(self) -> dict:
        return {
            "Ms_db": self.ms_db,
            "Mr_db": self.mr_db,
            "omega_res": self.omega_res,
            "Ms_limit_db": self.ms_limit_db,
            "Mr_limit_db": self.mr_limit_db,
            "Ms_pass": self.ms_pass,
            "Mr_pass": self.mr_pass,
            "modulus_margin": self.modulus_margin,
        }


def robustness_check(
    omega: np.ndarray,
    s_inf: np.ndarray,
    omega_res: float,
    ms_limit_db: float = 6.0,
    mr_limit_db: float = 2.5,
) -> RobustnessReport:
    """Peak worst-case sensitivity below omega_res (Ms) and at/above it (Mr),
    checked against the dB limits."""
    omega = np.asarray(omega, dtype=float)
    s_inf = np.asarray(s_inf, dtype=float)
    low = omega < omega_res
    high = omega >= omega_res
    if not np.any(low) or not np.any(high):
        raise ValidationError(
            f"omega_res={omega_res!r} must split the grid "
            f"[{omega[0]!r}, {omega[-1]!r}] into two non-empty parts"
        )
    ms = float(np.max(s_inf[low]))
    mr = float(np.max(s_inf[high]))
    ms_db = 20.0 * math.log10(ms)
    mr_db = 20.0 * math.log10(mr)
    return RobustnessReport(
        ms_db=ms_db, mr_db=mr_db, omega_res=omega_res,
        ms_limit_db=ms_limit_db, mr_limit_db=mr_limit_db,
        ms_pass=ms_db <= ms_limit_db, mr_pass=mr_db <= mr_limit_db,
        modulus_margin=1.0 / ms,
    )


def bode_integral(omega: np.ndarray, curve: np.ndarray,
                  span: tuple[float, float] | None = None) -> float:
    """Trapezoidal integral of ln(curve) d(omega) over the span."""
    omega = np.asarray(omega, dtype=float)
    curve = np.asarray(curve, dtype=float)
    if span is not None:
        mask = (omega >= span[0]) & (omega <= span[1])
        omega, curve = omega[mask], curve[mask]
    if omega.size < 2:
        raise ValidationError("span leaves fewer than 2 grid points")
    if np.any(curve <= 0.0):
        raise ValidationError("Bode integral needs a strictly positive curve")
    return float(np.trapezoid(np.log(curve), omega))


def suggest_omega_res(plant, omega_grid) -> float | None:
    """First local extremum of |G| on the grid (a suggestion only; the split
    frequency is a configuration decision)."""
    grid = np.asarray(omega_grid, dtype=float)
    mags = []
    for w in grid:
        if isinstance(plant, FrfTable):
            mags.append(abs(interp_frf(plant, float(w))))
        else:
            mags.append(abs(eval_tf(plant if isinstance(plant, RationalTf) else plant.model, float(w))))
    mags = np.asarray(mags)
    d = np.diff(np.sign(np.diff(mags)))
    idx = np.nonzero(d != 0)[0]
    if idx.size == 0:
        return None
    return float(grid[idx[0] + 1])


def detect_crossover(plant, c_l: RationalTf, omega_grid) -> float:
    """First downward |L| = 1 crossing of the linear loop, log-interpolated."""
    grid = np.asarray(omega_grid, dtype=float)
    mags = np.empty(grid.size)
    for i, w in enumerate(grid):
        g = interp_frf(plant, float(w)) if isinstance(plant, FrfTable) else eval_tf(
            plant if isinstance(plant, RationalTf) else plant.model, float(w))
        mags[i] = abs(eval_tf(c_l, float(w)) * g)
    for i in range(grid.size - 1):
        if mags[i] >= 1.0 > mags[i + 1]:
            la, lb = math.log(mags[i]), math.log(mags[i + 1])
            wa, wb = math.log(grid[i]), math.log(grid[i + 1])
            return math.exp(wa + (0.0 - la) * (wb - wa) / (lb - la))
    raise ValidationError("no downward unity-gain crossing of |L| on the grid")


# ---------------------------------------------------------------------------
# two-resets-per-cycle check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResetCountPoint:
    omega: float
    resets_per_period: int | None   # None = simulation did not converge
    ok: bool | None                 # exactly two resets; None = inconclusive


def two_resets_check(
    loop: LoopConfig,
    omega_grid,
    *,
    samples_per_period: int = 800,
    n_periods: int = 10,
    max_periods: int = 120,
) -> list[ResetCountPoint]:
    """Simulate the closed loop at each frequency and count steady-state
    resets per period; exactly two backs the single-crossing assumption."""

    def point(w: float) -> ResetCountPoint:
        try:
            rec = simulate_sinusoid_loop(
                plant=loop.plant, element=loop.element, c1=loop.c1, c2=loop.c2,
                omega=float(w), r0=loop.r0, samples_per_period=samples_per_period,
                n_periods=n_periods, max_periods=max_periods,
            )
        except NonConvergenceError:
            return ResetCountPoint(float(w), None, None)
        count = rec.resets_per_period
        return ResetCountPoint(float(w), count, count == 2)

    return parallel_map(point, [float(w) for w in np.asarray(omega_grid, dtype=float)])


# ---------------------------------------------------------------------------
# add-on design procedure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AddonDesignResult:
    design: CglpDesign | None
    loop: LoopConfig
    curves: SensitivityCurves
    report: RobustnessReport
    verdict: str                     # "pass" | "fail"
    theta_required: float
    theta_available: float
    omega_c: float
    delta_at_notches: dict[float, float]
    reset_check: list[ResetCountPoint] | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def design_addon(
    plant,
    c_l: RationalTf,
    notches: list[NotchSpec],
    omega_l: float,
    a_rho: float,
    *,
    omega_c: float | None = None,
    c_f: float = 1.0,
    grid,
    omega_res: float,
    n_max: int = 39,
    ms_limit_db: float = 6.0,
    mr_limit_db: float = 2.5,
    delta_s_max: float = 0.0,
    c1_notch_indices: tuple[int, ...] = (),
    r0: float = 1.0,
    check_resets: bool = False,
    reset_check_grid=None,
) -> AddonDesignResult:
    """The add-on design procedure: gain filter + phase-compensating CgLp.

    The notch product sets the required phase at the crossover; the CgLp
    corner comes from the backward solve; the loop is assembled with the
    gain filter(s) in the forward path (or before the reset element for
    entries listed in ``c1_notch_indices``); the verdict requires both
    robustness constraints and a sensitivity reduction at every notch
    center (delta_s below ``delta_s_max``).
    """
    grid = np.asarray(grid, dtype=float)
    if omega_c is None:
        omega_c = detect_crossover(plant, c_l, grid)

    if not notches:
        # degenerate: no gain filter, nothing to compensate; pure linear loop
        loop = LoopConfig(plant=plant, element=identity_element(), c2=c_l,
                          n_max=n_max, r0=r0)
        curves = compute_sensitivity_curves(loop, grid, reference_controller=c_l)
        report = robustness_check(grid, curves.s_inf, omega_res, ms_limit_db, mr_limit_db)
        verdict = "pass" if report.passed else "fail"
        return AddonDesignResult(None, loop, curves, report, verdict,
                                 0.0, theta_max(omega_l, a_rho, omega_c), omega_c, {})

    first_notch = min(n.omega_n for n in notches)
    if not (first_notch <= omega_l <= omega_c):
        raise ValidationError(
            f"omega_l={omega_l!r} must lie between the lowest targeted frequency "
            f"({first_notch!r}) and the crossover ({omega_c!r}); picking it above the "
            "problematic band keeps the nonlinearity away from it"
        )

    notch_tfs = [make_inverse_notch(n) for n in notches]
    cn_total = UNITY
    for tf in notch_tfs:
        cn_total = cn_total * tf
    theta_required = -float(np.angle(eval_tf(cn_total, omega_c)))
    theta_avail = theta_max(omega_l, a_rho, omega_c)

    omega_f = solve_omega_f(omega_l, a_rho, PhaseTarget(omega_c, theta_required))
    design = make_cglp(omega_l, omega_f, a_rho, c_f)

    c1 = UNITY
    c2_chain = design.k_c * design.lead_tf()
    for i, tf in enumerate(notch_tfs):
        if i in c1_notch_indices:
            c1 = c1 * tf
        else:
            c2_chain = c2_chain * tf
    c2_chain = c2_chain * c_l
    loop = LoopConfig(
        plant=plant, element=design.reset_element(),
        c1=None if c1 is UNITY else c1, c2=c2_chain, n_max=n_max, r0=r0,
    )

    curves = compute_sensitivity_curves(loop, grid, reference_controller=c_l)
    report = robustness_check(grid, curves.s_inf, omega_res, ms_limit_db, mr_limit_db)

    delta_at = {}
    for spec in notches:
        w = spec.omega_n
        s_lin_w = linear_sensitivity_mag(plant, c_l, [w])[0]
        s_inf_w = pseudo_sensitivity(loop, w)
        delta_at[w] = float(improvement_indicator(np.array([s_lin_w]), np.array([s_inf_w]))[0])

    reductions_ok = all(d < delta_s_max for d in delta_at.values())
    verdict = "pass" if (report.passed and reductions_ok) else "fail"

    reset_check = None
    if check_resets:
        rc_grid = reset_check_grid if reset_check_grid is not None else np.geomspace(
            grid[0], grid[-1], 10)
        reset_check = two_resets_check(loop, rc_grid)

    return AddonDesignResult(design, loop, curves, report, verdict,
                             theta_required, theta_avail, omega_c, delta_at, reset_check)
