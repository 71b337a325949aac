"""Discrete-time hybrid closed-loop simulator over synthetic parametric
plants, reference-trajectory generation, and time-domain run metrics
(settling duration, stationary RMS, error PSD).

Serves as the brute-force oracle for every frequency-domain prediction:
drive the loop with a sinusoid, FFT the steady-state error, compare against
the sensitivity harmonics.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.signal

from .errors import (
    BudgetExceededError,
    DivergenceError,
    InsufficientDataError,
    NonConvergenceError,
    ValidationError,
)
from .lti import RationalTf, tustin_sos
from .reset import ResetElement, discretize_reset, step_discrete


# ---------------------------------------------------------------------------
# synthetic plants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticPlant:
    """Parametric continuous plant with a documented low-frequency mode."""

    model: RationalTf
    fs: float            # default simulation sample rate
    mode_omega: float    # lightly damped base-frame mode (rad/s)
    label: str


def two_mass_plant(
    mode_omega: float = 5.0,
    zeta: float = 0.02,
    stage_mass: float = 1.0,
    base_mass: float = 10.0,
    fs: float = 10_000.0,
) -> SyntheticPlant:
    """Stage-on-base two-mass model measured at the relative encoder.

    Force acts between base and stage; the base hangs on a lightly damped
    suspension, producing one low-frequency mode (anti-resonance/resonance
    pair) below the intended crossover and a double-integrator mid-band:

        G(s) = ((m1+m2) s^2 + c s + k) / (m2 s^2 (m1 s^2 + c s + k))

    with k = m1*mode_omega^2 and c = 2*zeta*m1*mode_omega.
    """
    m1, m2 = float(base_mass), float(stage_mass)
    k = m1 * mode_omega**2
    c = 2.0 * zeta * m1 * mode_omega
    num = (m1 + m2, c, k)
    den = (m2 * m1, m2 * c, m2 * k, 0.0, 0.0)
    return SyntheticPlant(
        RationalTf(num, den, label="two-mass"), fs=fs, mode_omega=mode_omega, label="two-mass"
    )


SYNTHETIC_PLANTS = {
    "two-mass": two_mass_plant,
}


def synthetic_plant(plant_id: str, **kwargs) -> SyntheticPlant:
    try:
        factory = SYNTHETIC_PLANTS[plant_id]
    except KeyError:
        raise ValidationError(
            f"unknown synthetic plant {plant_id!r}; known: {sorted(SYNTHETIC_PLANTS)}"
        ) from None
    return factory(**kwargs)


# ---------------------------------------------------------------------------
# reference trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StationaryRegion:
    """Hold interval [t_r, t_e] where the reference is flat at ``level``."""

    t_r: float
    t_e: float
    level: float
    label: str = ""


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    r: np.ndarray
    regions: tuple[StationaryRegion, ...]
    bound: float  # permissible error band B_x

    @property
    def t_r(self) -> float:
        return self.regions[0].t_r

    @property
    def t_e(self) -> float:
        return self.regions[0].t_e

    @property
    def fs(self) -> float:
        return 1.0 / float(self.t[1] - self.t[0])


def _minjerk(tau: np.ndarray) -> np.ndarray:
    """C2 smooth 0->1 ramp (quintic; zero velocity/acceleration at ends)."""
    return 10.0 * tau**3 - 15.0 * tau**4 + 6.0 * tau**5


def make_trajectory(
    distance: float,
    move_duration: float,
    hold_duration: float,
    fs: float,
    *,
    bound: float,
    backward: bool = False,
) -> Trajectory:
    """Point-to-point move with hold; optionally a return move and hold.

    ``distance`` of 0 yields a flat trajectory whose whole span is the
    stationary region.
    """
    if move_duration <= 0 or hold_duration <= 0 or fs <= 0:
        raise ValidationError("durations and sample rate must be positive")
    ts = 1.0 / fs
    n_move = max(1, int(round(move_duration * fs)))
    n_hold = max(1, int(round(hold_duration * fs)))

    segs = []
    regions = []
    t_cursor = 0.0
    if distance == 0.0:
        n = n_move + n_hold
        t = ts * np.arange(n)
        r = np.zeros(n)
        return Trajectory(t, r, (StationaryRegion(0.0, t[-1], 0.0, "hold"),), bound)

    tau = np.arange(1, n_move + 1) / n_move
    up = distance * _minjerk(tau)
    segs.append(up)
    t_cursor += n_move * ts
    regions.append(StationaryRegion(t_cursor, t_cursor + n_hold * ts, distance, "forward-hold"))
    segs.append(np.full(n_hold, distance))
    t_cursor += n_hold * ts
    if backward:
        down = distance - distance * _minjerk(tau)
        segs.append(down)
        t_cursor += n_move * ts
        regions.append(StationaryRegion(t_cursor, t_cursor + n_hold * ts, 0.0, "backward-hold"))
        segs.append(np.zeros(n_hold))
        t_cursor += n_hold * ts

    r = np.concatenate([[0.0], *segs])
    t = ts * np.arange(r.size)
    return Trajectory(t, r, tuple(regions), bound)


# ---------------------------------------------------------------------------
# disturbances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DisturbanceSpec:
    """Plant-input decaying sinusoid (base-frame surrogate) plus optional
    seeded measurement noise."""

    amplitude: float = 0.0
    omega: float = 0.0
    decay: float = 0.0
    t_start: float = 0.0
    noise_std: float = 0.0
    seed: int = 0

    def input_disturbance(self, t: np.ndarray) -> np.ndarray:
        if self.amplitude == 0.0:
            return np.zeros_like(t)
        dt = t - self.t_start
        active = dt >= 0.0
        d = np.zeros_like(t)
        d[active] = self.amplitude * np.exp(-self.decay * dt[active]) * np.sin(self.omega * dt[active])
        return d

    def measurement_noise(self, n: int) -> np.ndarray:
        if self.noise_std == 0.0:
            return np.zeros(n)
        rng = np.random.default_rng(self.seed)
        return self.noise_std * rng.standard_normal(n)


# ---------------------------------------------------------------------------
# closed-loop simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimResult:
    """Per-sample traces of one closed-loop run."""

    t: np.ndarray
    r: np.ndarray
    e: np.ndarray
    u: np.ndarray
    y: np.ndarray
    e_r: np.ndarray
    u_r: np.ndarray
    reset_flags: np.ndarray
    ts: float

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("t,r,e,u,y,reset_flag\n")
            for i in range(self.t.size):
                fh.write(
                    f"{float(self.t[i])!r},{float(self.r[i])!r},{float(self.e[i])!r},"
                    f"{float(self.u[i])!r},{float(self.y[i])!r},{int(self.reset_flags[i])}\n"
                )


def read_trace_csv(path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.asarray(data[name]) for name in data.dtype.names}


def _plant_model(plant) -> RationalTf:
    if isinstance(plant, SyntheticPlant):
        return plant.model
    if isinstance(plant, RationalTf):
        return plant
    raise ValidationError(
        "closed-loop simulation needs a realizable parametric plant, "
        f"not {type(plant).__name__} (FRF-only plants cannot be stepped in time)"
    )


def simulate_closed_loop(
    *,
    plant,
    element: ResetElement,
    c1: RationalTf | None,
    c2: RationalTf,
    r: np.ndarray,
    ts: float,
    disturbance: DisturbanceSpec | None = None,
    y_bound: float = 1e9,
    wall_budget_s: float | None = None,
) -> SimResult:
    """Step the Fig.-1 loop sample by sample.

    Loop closure carries one sample of delay: e_k = r_k - y_meas_{k-1}
    (documented convention; the frequency-domain pipeline can mirror it).
    Raises :class:`DivergenceError` when |y| exceeds ``y_bound``.
    """
    model = _plant_model(plant)
    n = len(r)
    t = ts * np.arange(n)
    dist = disturbance or DisturbanceSpec()
    d_i = dist.input_disturbance(t)
    d_n = dist.measurement_noise(n)

    c1_step = tustin_sos(c1, ts).stepper() if c1 is not None else None
    c2_step = tustin_sos(c2, ts).stepper()
    g_step = tustin_sos(model, ts).stepper()
    r_state = discretize_reset(element, ts)

    out_e = np.empty(n)
    out_u = np.empty(n)
    out_y = np.empty(n)
    out_er = np.empty(n)
    out_ur = np.empty(n)
    out_flags = np.zeros(n, dtype=bool)

    deadline = None if wall_budget_s is None else time.monotonic() + wall_budget_s
    y_meas_prev = 0.0
    for k in range(n):
        e_k = float(r[k]) - y_meas_prev
        e_r = c1_step.step(e_k) if c1_step is not None else e_k
        u_r, hit = step_discrete(r_state, e_r)
        u_k = c2_step.step(u_r)
        y_k = g_step.step(u_k + d_i[k])
        y_meas_prev = y_k + d_n[k]

        out_e[k] = e_k
        out_er[k] = e_r
        out_ur[k] = u_r
        out_u[k] = u_k
        out_y[k] = y_k
        out_flags[k] = hit
        if abs(y_k) > y_bound:
            raise DivergenceError(
                f"|y|={abs(y_k):.3e} exceeded bound {y_bound:.3e} at t={t[k]:.6g}s"
            )
        if deadline is not None and (k & 0x3FF) == 0 and time.monotonic() > deadline:
            raise BudgetExceededError(
                f"simulation exceeded wall budget of {wall_budget_s}s at sample {k}/{n}"
            )

    return SimResult(t, np.asarray(r, dtype=float), out_e, out_u, out_y,
                     out_er, out_ur, out_flags, ts)


@dataclass(frozen=True)
class SteadyLoopRecord:
    """Steady-state record of a sinusoid-driven closed loop.

    ``e``/``e_r``/``reset_flags`` hold the final period; ``e_record`` holds
    ``fft_periods`` whole periods for harmonic extraction, which averages
    out the one-sample reset-timing jitter some orbits never shed
    (``jitter_limited`` marks those).
    """

    omega: float
    r0: float
    ts: float
    e: np.ndarray
    e_r: np.ndarray
    reset_flags: np.ndarray
    e_record: np.ndarray
    fft_periods: int
    periods_run: int
    residual: float
    jitter_limited: bool

    @property
    def resets_per_period(self) -> int:
        return int(np.sum(self.reset_flags))

    def error_harmonic(self, n: int) -> complex:
        """Sine-referenced error phasor at harmonic n, normalized by r0
        (directly comparable to the sensitivity harmonic S_n)."""
        spec = np.fft.fft(self.e_record)
        k = n * self.fft_periods
        if k >= self.e_record.size // 2:
            raise ValidationError(f"harmonic {n} beyond Nyquist for {self.e_record.size} samples")
        return complex(2j * spec[k] / (self.e_record.size * self.r0))


def simulate_sinusoid_loop(
    *,
    plant,
    element: ResetElement,
    c1: RationalTf | None,
    c2: RationalTf,
    omega: float,
    r0: float = 1.0,
    samples_per_period: int = 1024,
    n_periods: int = 20,
    max_periods: int = 300,
    tol: float = 3e-5,
    plateau_tol: float = 5e-3,
    plateau_periods: int = 40,
    fft_periods: int = 16,
    wall_budget_s: float | None = None,
) -> SteadyLoopRecord:
    """Drive the loop with r(t) = r0 sin(omega t) until the error trace is
    periodic, then collect ``fft_periods`` periods for harmonic extraction.

    Convergence: period-to-period relative RMS below ``tol``. Some orbits
    never get there because the reset instant flips between adjacent
    samples indefinitely; when the residual stops improving below
    ``plateau_tol`` the orbit is accepted and flagged ``jitter_limited``.
    Anything else raises :class:`NonConvergenceError`.
    """
    if omega <= 0:
        raise ValidationError(f"omega must be positive, got {omega}")
    spp = int(samples_per_period)
    if spp < 200:
        raise ValidationError(f"need >= 200 samples per period, got {spp}")
    ts = 2.0 * math.pi / (omega * spp)

    model = _plant_model(plant)
    c1_step = tustin_sos(c1, ts).stepper() if c1 is not None else None
    c2_step = tustin_sos(c2, ts).stepper()
    g_step = tustin_sos(model, ts).stepper()
    r_state = discretize_reset(element, ts)

    phase_step = 2.0 * math.pi / spp
    ref = r0 * np.sin(phase_step * np.arange(spp))

    deadline = None if wall_budget_s is None else time.monotonic() + wall_budget_s
    e_cur = np.empty(spp)
    er_cur = np.empty(spp)
    flags = np.zeros(spp, dtype=bool)
    y_state = [0.0]  # y_meas_prev, shared across period calls

    def run_period() -> None:
        y_meas_prev = y_state[0]
        for i in range(spp):
            e_k = float(ref[i]) - y_meas_prev
            e_r = c1_step.step(e_k) if c1_step is not None else e_k
            u_r, hit = step_discrete(r_state, e_r)
            u_k = c2_step.step(u_r)
            y_meas_prev = g_step.step(u_k)
            e_cur[i] = e_k
            er_cur[i] = e_r
            flags[i] = hit
        y_state[0] = y_meas_prev
        if not np.all(np.isfinite(e_cur)) or abs(y_meas_prev) > 1e12:
            raise DivergenceError(f"closed loop diverged at omega={omega!r}")

    prev = None
    residual = math.inf
    best = math.inf
    stagnation = 0
    jitter_limited = False
    periods_done = 0
    for p in range(max_periods):
        run_period()
        periods_done = p + 1
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceededError(
                f"sinusoid run exceeded wall budget of {wall_budget_s}s "
                f"after {periods_done} periods"
            )
        if prev is not None:
            scale = float(np.sqrt(np.mean(prev**2))) or 1.0
            residual = float(np.sqrt(np.mean((e_cur - prev) ** 2))) / scale
            if residual < best * 0.9:
                best = residual
                stagnation = 0
            else:
                stagnation += 1
            if residual < tol and periods_done >= n_periods:
                break
            if (
                stagnation >= plateau_periods
                and best < plateau_tol
                and periods_done >= n_periods
            ):
                jitter_limited = True
                break
        prev = e_cur.copy()
    else:
        raise NonConvergenceError(
            f"closed loop not periodic after {max_periods} periods at omega={omega!r} "
            f"(residual {residual:.3e})",
            periods_run=max_periods,
            residual=residual,
        )

    record = np.empty(spp * fft_periods)
    for q in range(fft_periods):
        run_period()
        record[q * spp:(q + 1) * spp] = e_cur
    return SteadyLoopRecord(omega, r0, ts, e_cur.copy(), er_cur.copy(), flags.copy(),
                            record, fft_periods, periods_done, residual, jitter_limited)


# ---------------------------------------------------------------------------
# run metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunMetrics:
    t_star: float          # settling duration t_s - t_r
    t_s: float
    t_r: float
    t_e: float
    rms: float             # RMS error over [t_r, t_e]
    settled: bool          # False when the error never re-enters the band
    bound: float


def settling_metrics(
    t: np.ndarray,
    e: np.ndarray,
    region: StationaryRegion,
    bound: float,
) -> RunMetrics:
    """Settling time per the last band exit inside the stationary region.

    t_s is the first instant after which |e| stays inside +-bound up to
    t_e; if the error is still outside at t_e the run is flagged unsettled
    and T* spans the whole region.
    """
    mask = (t >= region.t_r) & (t <= region.t_e)
    if not np.any(mask):
        raise ValidationError("trace does not cover the stationary region")
    tt = t[mask]
    ee = np.abs(e[mask])
    outside = ee > bound
    if not np.any(outside):
        t_s = region.t_r
        settled = True
    else:
        last_out = int(np.max(np.nonzero(outside)[0]))
        if last_out == ee.size - 1:
            return RunMetrics(
                t_star=region.t_e - region.t_r, t_s=region.t_e, t_r=region.t_r,
                t_e=region.t_e, rms=float(np.sqrt(np.mean(e[mask] ** 2))),
                settled=False, bound=bound,
            )
        t_s = float(tt[last_out + 1])
        settled = True
    return RunMetrics(
        t_star=t_s - region.t_r, t_s=t_s, t_r=region.t_r, t_e=region.t_e,
        rms=float(np.sqrt(np.mean(e[mask] ** 2))), settled=settled, bound=bound,
    )


def error_psd(
    e: np.ndarray,
    fs: float,
    *,
    start_offset: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Hann-windowed averaged periodogram of an error record.

    Returns (omega rad/s, density per rad/s); the density integrates to
    approximately the signal variance. ``start_offset`` skips initial
    samples for transient-leakage studies.
    """
    x = np.asarray(e, dtype=float)[start_offset:]
    if x.size < 256:
        raise InsufficientDataError(
            f"need >= 256 samples for a PSD estimate, got {x.size}"
        )
    nperseg = min(1024, x.size // 4)
    freq, pxx = scipy.signal.welch(
        x, fs=fs, window="hann", nperseg=nperseg, noverlap=nperseg // 2,
        scaling="density", detrend="constant",
    )
    return 2.0 * np.pi * freq, pxx / (2.0 * np.pi)
