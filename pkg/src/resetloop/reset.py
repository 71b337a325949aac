"""First-order reset elements: state space, base-linear transfer function,
discrete-time realization with the strict reset surface, and the steady-state
sinusoid simulator used as the brute-force oracle for the harmonic formulas.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from .errors import (
    NonConvergenceError,
    NonFiniteSignalError,
    ValidationError,
)
from .lti import RationalTf

# post-reset state multiplier bound; 1.0 is the documented linear boundary
# (resets become the identity and the element behaves as its BLS)
GAMMA_MIN = -1.0
GAMMA_MAX = 1.0


@dataclass(frozen=True)
class ResetElement:
    """State-space reset element with diagonal reset-value matrix.

    State x jumps to diag(gamma) * x whenever the input crosses zero;
    between resets the element follows its base linear system (BLS)
    (A_r, B_r, C_r, D_r).
    """

    a_r: np.ndarray   # (n, n)
    b_r: np.ndarray   # (n,)
    c_r: np.ndarray   # (n,)
    d_r: float
    gamma: np.ndarray  # (n,) diagonal of the reset-value matrix
    label: str = ""

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a_r, dtype=float))
        b = np.asarray(self.b_r, dtype=float).reshape(-1)
        c = np.asarray(self.c_r, dtype=float).reshape(-1)
        g = np.asarray(self.gamma, dtype=float).reshape(-1)
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValidationError("A_r must be square")
        if b.shape != (n,) or c.shape != (n,) or g.shape != (n,):
            raise ValidationError("B_r, C_r, gamma must all have length n")
        if np.any(g <= GAMMA_MIN) or np.any(g > GAMMA_MAX):
            raise ValidationError(
                f"reset values must lie in (-1, 1] (1 = never effectively resets), got {g}"
            )
        object.__setattr__(self, "a_r", a)
        object.__setattr__(self, "b_r", b)
        object.__setattr__(self, "c_r", c)
        object.__setattr__(self, "d_r", float(self.d_r))
        object.__setattr__(self, "gamma", g)

    @property
    def order(self) -> int:
        return self.a_r.shape[0]

    @property
    def a_rho(self) -> np.ndarray:
        return np.diag(self.gamma)

    def is_linear(self) -> bool:
        """True when every reset is the identity map."""
        return bool(np.all(self.gamma == 1.0))

    def to_json_dict(self) -> dict:
        return {
            "Ar": self.a_r.tolist(),
            "Br": self.b_r.tolist(),
            "Cr": self.c_r.tolist(),
            "Dr": self.d_r,
            "Arho": self.gamma.tolist(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ResetElement":
        return cls(
            np.asarray(obj["Ar"], dtype=float),
            np.asarray(obj["Br"], dtype=float),
            np.asarray(obj["Cr"], dtype=float),
            float(obj["Dr"]),
            np.asarray(obj["Arho"], dtype=float),
            label=str(obj.get("label", "")),
        )


def gfore(omega_r: float, a_rho: float, d_r: float = 0.0, label: str = "") -> ResetElement:
    """Generalized first-order reset element; nonzero d_r makes it proportional."""
    if omega_r <= 0:
        raise ValidationError(f"omega_r must be positive, got {omega_r}")
    return ResetElement(
        np.array([[-omega_r]]), np.array([1.0]), np.array([omega_r]), d_r,
        np.array([a_rho]), label=label or f"gfore({omega_r:g},{a_rho:g})",
    )


def clegg(a_rho: float = 0.0) -> ResetElement:
    """The reset integrator (A_r = 0); DF phase lag ~ -38 deg instead of -90."""
    return ResetElement(
        np.array([[0.0]]), np.array([1.0]), np.array([1.0]), 0.0,
        np.array([a_rho]), label="clegg",
    )


def identity_element() -> ResetElement:
    """Pass-through element (unity BLS, no state coupling, never-firing
    dynamics); lets pure-linear loops flow through the reset pipeline."""
    return ResetElement(
        np.array([[-1.0]]), np.array([0.0]), np.array([0.0]), 1.0,
        np.array([1.0]), label="identity",
    )


def bls_tf(el: ResetElement) -> RationalTf:
    """Transfer function C_r (sI - A_r)^-1 B_r + D_r of the base linear system."""
    num, den = scipy.signal.ss2tf(
        el.a_r, el.b_r.reshape(-1, 1), el.c_r.reshape(1, -1), [[el.d_r]]
    )
    return RationalTf(tuple(np.atleast_2d(num)[0]), tuple(den), label=f"bls:{el.label}")


# ---------------------------------------------------------------------------
# discrete-time realization
# ---------------------------------------------------------------------------

def reset_surface_hit(e_k: float, e_prev: float) -> bool:
    """Strict discrete reset surface: e_k == 0 or e_k * e_prev < 0.

    The strict inequality is the point: after a reset at an exact zero the
    next sample sees e_prev == 0, the product is 0, and no second reset
    fires for the same crossing.
    """
    return e_k == 0.0 or e_k * e_prev < 0.0


@dataclass
class DiscreteResetState:
    """Single-owner mutable state of the discretized reset element.

    The base linear system (with the design feedthrough held out) is Tustin
    discretized to scalars (at, bt, ct, dt); the design feedthrough d_r adds
    in parallel at the output and is never scaled by the reset.
    """

    at: float
    bt: float
    ct: float
    dt: float
    gamma: float
    d_r: float
    ts: float
    x: float = 0.0
    e_prev: float = 0.0
    resets: int = 0
    k: int = field(default=0)

    def copy(self) -> "DiscreteResetState":
        return DiscreteResetState(self.at, self.bt, self.ct, self.dt, self.gamma,
                                  self.d_r, self.ts, self.x, self.e_prev, self.resets, self.k)


def discretize_reset(el: ResetElement, ts: float) -> DiscreteResetState:
    """Discrete realization of a first-order reset element at sample period T_s.

    The BLS with D_r = 0 is Tustin discretized; D_r is added back as a
    parallel feedthrough on the output. Elements with more than one state
    are stored but not realizable here.
    """
    if el.order != 1:
        raise ValidationError(
            f"discrete realization supports first-order elements only, got order {el.order}"
        )
    if ts <= 0:
        raise ValidationError(f"sample period must be positive, got {ts}")
    (ad, bd, cd, dd, _) = scipy.signal.cont2discrete(
        (el.a_r, el.b_r.reshape(-1, 1), el.c_r.reshape(1, -1), [[0.0]]), ts, method="bilinear"
    )
    return DiscreteResetState(
        at=float(np.asarray(ad).ravel()[0]),
        bt=float(np.asarray(bd).ravel()[0]),
        ct=float(np.asarray(cd).ravel()[0]),
        dt=float(np.asarray(dd).ravel()[0]),
        gamma=float(el.gamma[0]),
        d_r=el.d_r,
        ts=ts,
    )


def step_discrete(state: DiscreteResetState, e_k: float) -> tuple[float, bool]:
    """Advance one sample; returns (u_k, reset_fired).

    Four-branch update: on a surface hit both the next state and the output
    of the reset branch are scaled by gamma; otherwise the pure Tustin BLS
    path runs. The held-out feedthrough d_r * e_k always adds unscaled.
    """
    if not math.isfinite(e_k):
        raise NonFiniteSignalError(f"non-finite reset-element input at sample {state.k}")
    hit = reset_surface_hit(e_k, state.e_prev)
    if hit:
        u = state.gamma * (state.ct * state.x + state.dt * e_k)
        state.x = state.gamma * (state.at * state.x + state.bt * e_k)
        state.resets += 1
    else:
        u = state.ct * state.x + state.dt * e_k
        state.x = state.at * state.x + state.bt * e_k
    u += state.d_r * e_k
    state.e_prev = e_k
    state.k += 1
    return u, hit


def run_sequence(state: DiscreteResetState, inputs) -> tuple[np.ndarray, np.ndarray]:
    """Feed a whole input sequence; returns (outputs, reset_flags)."""
    out = np.empty(len(inputs))
    flags = np.zeros(len(inputs), dtype=bool)
    for i, e in enumerate(inputs):
        out[i], flags[i] = step_discrete(state, float(e))
    return out, flags


# ---------------------------------------------------------------------------
# steady-state sinusoid oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SteadyStateRecord:
    """One steady-state period of the response to e(t) = amplitude*sin(omega t)."""

    omega: float
    amplitude: float
    ts: float
    t: np.ndarray           # one period, uniformly sampled, phase origin at sin 0
    e: np.ndarray
    u: np.ndarray
    reset_flags: np.ndarray
    periods_run: int
    residual: float         # final period-to-period relative RMS difference

    @property
    def resets_per_period(self) -> int:
        return int(np.sum(self.reset_flags))

    def harmonic(self, n: int) -> complex:
        """Complex sine-referenced phasor of harmonic n, normalized by amplitude.

        With u(t) = sum |c_n| A sin(n w t + ang c_n), returns c_n.
        """
        spectrum = np.fft.fft(self.u)
        n_samples = self.u.size
        if n >= n_samples // 2:
            raise ValidationError(f"harmonic {n} beyond Nyquist for {n_samples} samples")
        return complex(2j * spectrum[n] / (n_samples * self.amplitude))

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("t,e_r,u_r,reset_flag\n")
            for t, e, u, f in zip(self.t, self.e, self.u, self.reset_flags):
                fh.write(f"{float(t)!r},{float(e)!r},{float(u)!r},{int(f)}\n")


def simulate_sinusoid_steady(
    el: ResetElement,
    omega: float,
    amplitude: float = 1.0,
    ts: float | None = None,
    n_periods: int = 20,
    *,
    samples_per_period: int = 1024,
    max_periods: int = 200,
    tol: float = 1e-6,
) -> SteadyStateRecord:
    """Simulate until periodic steady state and return the final period.

    Convergence is declared when the relative RMS difference between
    consecutive periods drops below ``tol`` (and at least ``n_periods``
    periods have run); failing that by ``max_periods`` raises
    :class:`NonConvergenceError`. ``ts`` must divide the excitation period
    into an integer number (>= 200) of samples; by default it is derived
    from ``samples_per_period``.
    """
    if omega <= 0:
        raise ValidationError(f"omega must be positive, got {omega}")
    if n_periods < 1:
        raise ValidationError("n_periods must be at least 1")
    period = 2.0 * math.pi / omega
    if ts is None:
        spp = int(samples_per_period)
        ts = period / spp
    else:
        spp_f = period / ts
        spp = int(round(spp_f))
        if abs(spp_f - spp) > 1e-9 * spp:
            raise ValidationError(
                f"ts={ts} does not divide the period {period} into integer samples"
            )
    if spp < 200:
        raise ValidationError(f"need >= 200 samples per period, got {spp}")

    state = discretize_reset(el, ts)
    phase_step = 2.0 * math.pi / spp
    prev = None
    u_cur = np.empty(spp)
    flags_cur = np.zeros(spp, dtype=bool)
    e_cur = np.empty(spp)
    residual = math.inf
    periods_done = 0
    for p in range(max_periods):
        for i in range(spp):
            e = amplitude * math.sin(phase_step * i)
            u, hit = step_discrete(state, e)
            e_cur[i] = e
            u_cur[i] = u
            flags_cur[i] = hit
        periods_done = p + 1
        if prev is not None:
            scale = float(np.sqrt(np.mean(prev**2)))
            if scale == 0.0:
                scale = 1.0
            residual = float(np.sqrt(np.mean((u_cur - prev) ** 2))) / scale
            if residual < tol and periods_done >= n_periods:
                break
        prev = u_cur.copy()
    else:
        raise NonConvergenceError(
            f"no periodic steady state after {max_periods} periods "
            f"(residual {residual:.3e} >= tol {tol:.1e})",
            periods_run=max_periods,
            residual=residual,
        )

    t0 = (periods_done - 1) * period
    return SteadyStateRecord(
        omega=omega,
        amplitude=amplitude,
        ts=ts,
        t=t0 + ts * np.arange(spp),
        e=e_cur.copy(),
        u=u_cur.copy(),
        reset_flags=flags_cur.copy(),
        periods_run=periods_done,
        residual=residual,
    )


def save_element_json(el: ResetElement, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(el.to_json_dict(), fh, indent=2)


def load_element_json(path) -> ResetElement:
    with open(path, "r", encoding="ascii") as fh:
        return ResetElement.from_json_dict(json.load(fh))
