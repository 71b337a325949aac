"""Open-loop harmonic analysis of reset elements.

Describing functions of the reset element per harmonic (the H_n family with
its matrix intermediates), open-loop harmonic responses of the full chain,
CgLp describing functions, and the third-over-first harmonic-ratio
diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import FrfRangeError, SingularMatrixError, ValidationError
from .lti import eval_tf
from .reset import ResetElement

# odd harmonics 1..N_MAX_DEFAULT; harmonic energy of first-order reset
# elements decays ~1/n^2, verified against the simulation oracle in tests
N_MAX_DEFAULT = 39


@dataclass(frozen=True)
class HarmonicIntermediates:
    """Matrix intermediates of the describing-function computation, exposed
    for test inspection."""

    lam: np.ndarray      # w^2 I + A_r^2
    delta: np.ndarray    # I + exp(pi A_r / w)
    delta_r: np.ndarray  # I + A_rho exp(pi A_r / w)
    gamma_r: np.ndarray  # delta_r^-1 A_rho delta lam^-1
    theta_d: np.ndarray  # -(2 w^2 / pi) delta (gamma_r - lam^-1)


def hosidf_intermediates(el: ResetElement, omega: float) -> HarmonicIntermediates:
    if omega <= 0:
        raise ValidationError(f"omega must be positive, got {omega}")
    n = el.order
    eye = np.eye(n)
    a_rho = el.a_rho
    lam = omega**2 * eye + el.a_r @ el.a_r
    e_pi = expm((np.pi / omega) * el.a_r)
    delta = eye + e_pi
    delta_r = eye + a_rho @ e_pi
    try:
        lam_inv = np.linalg.inv(lam)
        if el.is_linear():
            # identity resets: the cancellation is exact, not just numerical
            gamma_r = lam_inv.copy()
        else:
            gamma_r = np.linalg.solve(delta_r, a_rho @ delta @ lam_inv)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(
            f"singular harmonic intermediate at omega={omega!r}: {exc}"
        ) from exc
    theta_d = -(2.0 * omega**2 / np.pi) * delta @ (gamma_r - lam_inv)
    return HarmonicIntermediates(lam, delta, delta_r, gamma_r, theta_d)


def hosidf_reset(el: ResetElement, omega: float, n: int,
                 inter: HarmonicIntermediates | None = None) -> complex:
    """Describing function of the reset element at harmonic ``n``.

    n = 1 carries the feedthrough and the (I + j Theta_D) correction; odd
    n >= 3 uses the j Theta_D injection at the harmonic frequency; even
    harmonics are exactly zero. ``inter`` may carry precomputed
    intermediates for the same (element, omega).
    """
    if n < 1:
        raise ValidationError(f"harmonic index must be >= 1, got {n}")
    if n % 2 == 0:
        return 0.0 + 0.0j
    if inter is None:
        inter = hosidf_intermediates(el, omega)
    eye = np.eye(el.order)
    c = el.c_r.reshape(1, -1)
    b = el.b_r.reshape(-1, 1)
    if n == 1:
        m = np.linalg.solve(1j * omega * eye - el.a_r, (eye + 1j * inter.theta_d) @ b)
        return complex((c @ m)[0, 0] + el.d_r)
    m = np.linalg.solve(1j * n * omega * eye - el.a_r, 1j * inter.theta_d @ b)
    return complex((c @ m)[0, 0])


# ---------------------------------------------------------------------------
# open-loop chain
# ---------------------------------------------------------------------------

def open_loop_harmonic(loop, omega: float, n: int) -> tuple[complex, bool]:
    """Harmonic ``n`` of the open-loop chain e -> C1 -> R -> C2 -> G.

    ``loop`` provides the block evaluators (`element`, `eval_c1`, `eval_c2`,
    `eval_plant`). Returns ``(value, truncated)``: when the plant response
    at n*omega is unavailable (outside a measured FRF band) the entry is
    flagged truncated and reported as 0 -- except at the fundamental, where
    a missing plant response is the caller's grid error and propagates.
    """
    h_n = hosidf_reset(loop.element, omega, n)
    if h_n == 0:
        return 0.0 + 0.0j, False
    try:
        g = loop.eval_plant(n * omega)
    except FrfRangeError:
        if n == 1:
            raise
        return 0.0 + 0.0j, True
    c2_v = loop.eval_c2(n * omega)
    c1_v = loop.eval_c1(omega)
    rot = np.exp(1j * (n - 1) * np.angle(c1_v))
    return complex(g * c2_v * h_n * c1_v * rot), False


@dataclass(frozen=True)
class HarmonicResponse:
    """Per-frequency matrix of complex harmonic values with truncation flags.

    Only odd harmonics are stored; even ones are identically zero by
    construction.
    """

    omega: np.ndarray          # (n_w,)
    harmonics: tuple[int, ...]  # odd, ascending
    values: np.ndarray         # (n_w, n_h) complex
    truncated: np.ndarray      # (n_w, n_h) bool

    def __post_init__(self):
        if any(h % 2 == 0 for h in self.harmonics):
            raise ValidationError("only odd harmonics are stored")
        if self.values.shape != (self.omega.size, len(self.harmonics)):
            raise ValidationError("values shape mismatch")

    def value(self, omega_index: int, n: int) -> complex:
        return complex(self.values[omega_index, self.harmonics.index(n)])

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("omega,n,re,im,truncated\n")
            for i, w in enumerate(self.omega):
                for j, n in enumerate(self.harmonics):
                    v = self.values[i, j]
                    fh.write(f"{float(w)!r},{n},{float(v.real)!r},{float(v.imag)!r},{int(self.truncated[i, j])}\n")


def read_harmonics_csv(path) -> HarmonicResponse:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "omega,n,re,im,truncated":
            raise ValidationError(f"bad harmonics CSV header {header!r}")
        for line in fh:
            w, n, re, im, tr = line.strip().split(",")
            rows.append((float(w), int(n), float(re), float(im), bool(int(tr))))
    omegas = sorted({r[0] for r in rows})
    harms = tuple(sorted({r[1] for r in rows}))
    values = np.zeros((len(omegas), len(harms)), dtype=complex)
    flags = np.zeros((len(omegas), len(harms)), dtype=bool)
    w_index = {w: i for i, w in enumerate(omegas)}
    h_index = {h: j for j, h in enumerate(harms)}
    for w, n, re, im, tr in rows:
        values[w_index[w], h_index[n]] = complex(re, im)
        flags[w_index[w], h_index[n]] = tr
    return HarmonicResponse(np.asarray(omegas), harms, values, flags)


def odd_harmonics(n_max: int) -> tuple[int, ...]:
    return tuple(range(1, n_max + 1, 2))


def element_harmonics(el: ResetElement, omega_grid, n_max: int = N_MAX_DEFAULT) -> HarmonicResponse:
    """Describing functions of one element tabulated over a grid."""
    grid = np.asarray(omega_grid, dtype=float)
    harms = odd_harmonics(n_max)
    values = np.zeros((grid.size, len(harms)), dtype=complex)
    for i, w in enumerate(grid):
        inter = hosidf_intermediates(el, float(w))
        for j, n in enumerate(harms):
            values[i, j] = hosidf_reset(el, float(w), n, inter)
    return HarmonicResponse(grid, harms, values, np.zeros_like(values, dtype=bool))


def open_loop_harmonics(loop, omega_grid, n_max: int | None = None) -> HarmonicResponse:
    """Open-loop chain harmonics over a grid, with truncation flags for
    plant queries that left the measured band."""
    grid = np.asarray(omega_grid, dtype=float)
    harms = odd_harmonics(n_max if n_max is not None else getattr(loop, "n_max", N_MAX_DEFAULT))
    values = np.zeros((grid.size, len(harms)), dtype=complex)
    flags = np.zeros(values.shape, dtype=bool)
    for i, w in enumerate(grid):
        for j, n in enumerate(harms):
            values[i, j], flags[i, j] = open_loop_harmonic(loop, float(w), n)
    return HarmonicResponse(grid, harms, values, flags)


# ---------------------------------------------------------------------------
# CgLp describing functions
# ---------------------------------------------------------------------------

def cglp_hosidf(design, omega: float, n: int) -> complex:
    """Describing function of the CgLp filter at harmonic ``n``:
    k_c * C_lead(n j omega) * H_n(omega), with the lead corner detuned by c_f.
    """
    h_n = hosidf_reset(design.reset_element(), omega, n)
    if h_n == 0:
        return 0.0 + 0.0j
    lead = eval_tf(design.lead_tf(), n * omega)
    return complex(design.k_c * lead * h_n)


def harmonic_ratio(design, omega_grid) -> np.ndarray:
    """100 * |c_3| / |c_1| per grid point (percent)."""
    grid = np.asarray(omega_grid, dtype=float)
    out = np.empty(grid.size)
    for i, w in enumerate(grid):
        c1 = cglp_hosidf(design, float(w), 1)
        c3 = cglp_hosidf(design, float(w), 3)
        out[i] = 100.0 * abs(c3) / abs(c1)
    return out
