"""Complex frequency-response arithmetic and LTI building blocks.

Rational transfer functions in s, tabulated frequency-response data with
log-log interpolation, the lead and inverse-notch constructors every other
module composes, and Tustin discretization to causal difference-equation
coefficients.

All frequencies are rad/s internally; ingestion converts Hz only under an
explicit flag.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from .errors import ConfigError, FrfRangeError, SingularityError, ValidationError

# |den(jw)| below this is treated as a pole on the evaluation grid
POLE_GUARD = 1e-300


# ---------------------------------------------------------------------------
# rational transfer functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalTf:
    """Rational transfer function num(s)/den(s).

    Coefficients are in descending powers of s, e.g. ``num=[1, 2]`` is s + 2.
    """

    num: tuple[float, ...]
    den: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        num = tuple(float(c) for c in self.num)
        den = tuple(float(c) for c in self.den)
        if len(num) == 0 or len(den) == 0:
            raise ValidationError("numerator and denominator must be non-empty")
        if den[0] == 0.0:
            raise ValidationError("denominator leading coefficient must be nonzero")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def degree(self) -> tuple[int, int]:
        return len(self.num) - 1, len(self.den) - 1

    def is_proper(self) -> bool:
        return len(self.num) <= len(self.den)

    def __mul__(self, other) -> "RationalTf":
        if isinstance(other, RationalTf):
            return RationalTf(
                tuple(np.polymul(self.num, other.num)),
                tuple(np.polymul(self.den, other.den)),
                label=_join_labels(self.label, other.label),
            )
        if isinstance(other, (int, float)):
            return RationalTf(tuple(c * float(other) for c in self.num), self.den, self.label)
        return NotImplemented

    __rmul__ = __mul__

    def to_json_dict(self) -> dict:
        return {"num": list(self.num), "den": list(self.den), "label": self.label}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "RationalTf":
        try:
            return cls(tuple(obj["num"]), tuple(obj["den"]), label=str(obj.get("label", "")))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad rational-filter JSON object: {exc}") from exc


UNITY = RationalTf((1.0,), (1.0,), label="1")


def _join_labels(a: str, b: str) -> str:
    if a and b:
        return f"{a}*{b}"
    return a or b


def eval_tf(tf: RationalTf, omega) -> complex | np.ndarray:
    """Evaluate ``tf`` at s = j*omega.

    ``omega`` may be a scalar or an array (rad/s, >= 0). Raises
    :class:`SingularityError` when the denominator magnitude falls below the
    machine guard at any requested point.
    """
    s = 1j * np.asarray(omega, dtype=float)
    num = np.polyval(np.asarray(tf.num), s)
    den = np.polyval(np.asarray(tf.den), s)
    bad = np.abs(den) < POLE_GUARD
    if np.any(bad):
        w_bad = float(np.atleast_1d(np.asarray(omega, dtype=float))[np.atleast_1d(bad)][0])
        raise SingularityError(w_bad)
    out = num / den
    if np.isscalar(omega) or np.asarray(omega).ndim == 0:
        return complex(out)
    return out


def make_lead(omega_l: float, omega_f: float, label: str = "") -> RationalTf:
    """Lead (lag when corners coincide: unity) filter (1 + s/omega_l)/(1 + s/omega_f).

    Requires 0 < omega_l <= omega_f; high-frequency gain is omega_f/omega_l.
    """
    if not (0.0 < omega_l <= omega_f):
        raise ValidationError(
            f"lead corners must satisfy 0 < omega_l <= omega_f, got ({omega_l}, {omega_f})"
        )
    return RationalTf((1.0 / omega_l, 1.0), (1.0 / omega_f, 1.0), label=label or "lead")


@dataclass(frozen=True)
class NotchSpec:
    """Inverse-notch parameters: center omega_n (rad/s) and quality pair.

    Peak magnitude is Q2/Q1 at omega_n; Q2 > Q1 amplifies, Q2 = Q1 is the
    degenerate unity filter.
    """

    omega_n: float
    q1: float
    q2: float

    def __post_init__(self):
        if not (self.omega_n > 0 and self.q1 > 0 and self.q2 > 0):
            raise ValidationError("notch requires omega_n > 0, Q1 > 0, Q2 > 0")
        if self.q2 < self.q1:
            raise ValidationError(
                f"inverse notch requires Q2 >= Q1 (peak gain Q2/Q1), got Q1={self.q1}, Q2={self.q2}"
            )

    @property
    def peak_gain(self) -> float:
        return self.q2 / self.q1

    def to_json_dict(self) -> dict:
        return {"omega_n": self.omega_n, "q1": self.q1, "q2": self.q2}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "NotchSpec":
        try:
            return cls(float(obj["omega_n"]), float(obj["q1"]), float(obj["q2"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad notch JSON object: {exc}") from exc


def make_inverse_notch(spec: NotchSpec, label: str = "") -> RationalTf:
    """Inverse notch (s^2/wn^2 + s/(wn*Q1) + 1)/(s^2/wn^2 + s/(wn*Q2) + 1)."""
    wn = spec.omega_n
    return RationalTf(
        (1.0 / wn**2, 1.0 / (wn * spec.q1), 1.0),
        (1.0 / wn**2, 1.0 / (wn * spec.q2), 1.0),
        label=label or f"invnotch@{wn:g}",
    )


# ---------------------------------------------------------------------------
# measured frequency-response tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrfTable:
    """Tabulated complex frequency response on a strictly increasing grid.

    Interpolation works on log-frequency vs log-magnitude and unwrapped
    phase; queries outside [omega_min, omega_max] raise
    :class:`FrfRangeError` rather than extrapolate.
    """

    omega: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if omega.ndim != 1 or omega.size < 2:
            raise ValidationError("FRF grid must be one-dimensional with at least 2 points")
        if values.shape != omega.shape:
            raise ValidationError("FRF grid and values must have identical shapes")
        if omega[0] <= 0:
            raise ValidationError("FRF grid frequencies must be > 0")
        if not np.all(np.diff(omega) > 0):
            raise ValidationError("FRF grid must be strictly increasing")
        mags = np.abs(values)
        if np.any(mags == 0.0):
            raise ValidationError("FRF values must be nonzero (log-magnitude interpolation)")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)
        # precomputed interpolation tables
        object.__setattr__(self, "_logw", np.log(omega))
        object.__setattr__(self, "_logmag", np.log(mags))
        object.__setattr__(self, "_phase", np.unwrap(np.angle(values)))

    @property
    def omega_min(self) -> float:
        return float(self.omega[0])

    @property
    def omega_max(self) -> float:
        return float(self.omega[-1])

    def covers(self, omega: float) -> bool:
        return self.omega_min <= omega <= self.omega_max


def interp_frf(frf: FrfTable, omega: float) -> complex:
    """Interpolated complex response at ``omega``.

    Exact at grid points. Outside the measured band raises
    :class:`FrfRangeError` carrying the offending frequency.
    """
    w = float(omega)
    if not frf.covers(w):
        raise FrfRangeError(w, frf.omega_min, frf.omega_max)
    logw = np.log(w)
    mag = np.exp(np.interp(logw, frf._logw, frf._logmag))
    ph = np.interp(logw, frf._logw, frf._phase)
    return complex(mag * np.exp(1j * ph))


# FRF CSV format (bit-exact): header `freq_unit,<hz|rad_s>`, rows `omega,re,im`.

def write_frf_csv(frf: FrfTable, path, freq_unit: str = "rad_s") -> None:
    if freq_unit not in ("hz", "rad_s"):
        raise ValidationError("freq_unit must be 'hz' or 'rad_s'")
    scale = 1.0 / (2.0 * np.pi) if freq_unit == "hz" else 1.0
    lines = [f"freq_unit,{freq_unit}"]
    for w, v in zip(frf.omega, frf.values):
        lines.append(f"{float(w) * scale!r},{float(v.real)!r},{float(v.imag)!r}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_frf_csv(path) -> FrfTable:
    """Parse the FRF CSV format; malformed rows report their line number."""
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ConfigError("empty FRF file", context=str(path))
    header = lines[0].split(",")
    if len(header) != 2 or header[0] != "freq_unit" or header[1] not in ("hz", "rad_s"):
        raise ConfigError(
            f"bad header {lines[0]!r}; expected 'freq_unit,<hz|rad_s>'", context=f"{path}:1"
        )
    unit = header[1]
    scale = 2.0 * np.pi if unit == "hz" else 1.0
    omegas, values = [], []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise ConfigError(f"expected 'omega,re,im', got {line!r}", context=f"{path}:{i}")
        try:
            w, re, im = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"non-numeric field in {line!r}", context=f"{path}:{i}") from exc
        omegas.append(w * scale)
        values.append(complex(re, im))
    try:
        return FrfTable(np.asarray(omegas), np.asarray(values),
                        metadata={"source": str(path), "freq_unit": unit})
    except ValidationError as exc:
        raise ConfigError(str(exc), context=str(path)) from exc


def sample_frf(tf: RationalTf, omega_grid) -> FrfTable:
    """Tabulate a rational model on a grid (used to fabricate measured-FRF fixtures)."""
    grid = np.asarray(omega_grid, dtype=float)
    return FrfTable(grid, eval_tf(tf, grid), metadata={"source": f"sampled:{tf.label}"})


# ---------------------------------------------------------------------------
# discretization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteTf:
    """Causal difference-equation coefficients b/a (lfilter convention) at T_s."""

    b: tuple[float, ...]
    a: tuple[float, ...]
    ts: float

    def freq_response(self, omega) -> complex | np.ndarray:
        """Response at z = exp(j*omega*T_s)."""
        z = np.exp(1j * np.asarray(omega, dtype=float) * self.ts)
        zi = 1.0 / z
        num = np.polyval(self.b[::-1], zi)  # b0 + b1 z^-1 + ...
        den = np.polyval(self.a[::-1], zi)
        out = num / den
        if np.isscalar(omega) or np.asarray(omega).ndim == 0:
            return complex(out)
        return out

    def stepper(self) -> "Df2tStepper":
        return Df2tStepper(self.b, self.a)


class Df2tStepper:
    """Per-sample direct-form-II-transposed filter (single-owner mutable state)."""

    __slots__ = ("b", "a", "z")

    def __init__(self, b, a):
        n = max(len(b), len(a))
        self.b = [0.0] * n
        self.a = [0.0] * n
        for i, c in enumerate(b):
            self.b[i] = float(c)
        for i, c in enumerate(a):
            self.a[i] = float(c)
        if self.a[0] != 1.0:
            a0 = self.a[0]
            self.b = [c / a0 for c in self.b]
            self.a = [c / a0 for c in self.a]
        self.z = [0.0] * (n - 1)

    def step(self, u: float) -> float:
        b, a, z = self.b, self.a, self.z
        if z:
            y = b[0] * u + z[0]
            for i in range(len(z) - 1):
                z[i] = b[i + 1] * u - a[i + 1] * y + z[i + 1]
            z[-1] = b[len(z)] * u - a[len(z)] * y
        else:
            y = b[0] * u
        return y

    def reset(self) -> None:
        for i in range(len(self.z)):
            self.z[i] = 0.0


def tustin_discretize(tf: RationalTf, ts: float) -> DiscreteTf:
    """Bilinear substitution s <- (2/T_s)(z-1)/(z+1).

    Requires a proper transfer function and T_s > 0. DC gain is preserved
    exactly for systems without a pole at s = 0.
    """
    if ts <= 0:
        raise ValidationError(f"sample period must be positive, got {ts}")
    if not tf.is_proper():
        raise ValidationError(
            f"Tustin discretization needs deg(num) <= deg(den), got {tf.degree}"
        )
    b, a = scipy.signal.bilinear(tf.num, tf.den, fs=1.0 / ts)
    b = np.atleast_1d(b)
    a = np.atleast_1d(a)
    return DiscreteTf(tuple(float(c) for c in b / a[0]), tuple(float(c) for c in a / a[0]), ts)


@dataclass(frozen=True)
class DiscreteSos:
    """Tustin-discretized filter as a cascade of second-order sections.

    Direct polynomial forms lose the clustered near-unit poles of heavily
    oversampled controllers; the biquad cascade keeps each pole pair
    accurate, so simulation stability matches the continuous design.
    """

    sections: np.ndarray  # (n, 6) scipy sos layout
    ts: float

    def freq_response(self, omega) -> complex | np.ndarray:
        zi = np.exp(-1j * np.asarray(omega, dtype=float) * self.ts)
        out = np.ones_like(zi, dtype=complex)
        for b0, b1, b2, a0, a1, a2 in self.sections:
            out = out * (b0 + b1 * zi + b2 * zi**2) / (a0 + a1 * zi + a2 * zi**2)
        if np.isscalar(omega) or np.asarray(omega).ndim == 0:
            return complex(out)
        return out

    def stepper(self) -> "SosStepper":
        return SosStepper(self.sections)


class SosStepper:
    """Per-sample cascade of direct-form-II-transposed biquads."""

    __slots__ = ("coef", "state")

    def __init__(self, sections: np.ndarray):
        self.coef = [tuple(float(c) for c in row) for row in sections]
        self.state = [[0.0, 0.0] for _ in self.coef]

    def step(self, u: float) -> float:
        for i, (b0, b1, b2, a0, a1, a2) in enumerate(self.coef):
            z = self.state[i]
            y = b0 * u + z[0]
            z[0] = b1 * u - a1 * y + z[1]
            z[1] = b2 * u - a2 * y
            u = y
        return u

    def reset(self) -> None:
        for z in self.state:
            z[0] = 0.0
            z[1] = 0.0


def tustin_sos(tf: RationalTf, ts: float) -> DiscreteSos:
    """Tustin discretization factored into second-order sections."""
    if ts <= 0:
        raise ValidationError(f"sample period must be positive, got {ts}")
    if not tf.is_proper():
        raise ValidationError(
            f"Tustin discretization needs deg(num) <= deg(den), got {tf.degree}"
        )
    z, p, k = scipy.signal.tf2zpk(tf.num, tf.den)
    zd, pd, kd = scipy.signal.bilinear_zpk(z, p, k, fs=1.0 / ts)
    if len(zd) == 0 and len(pd) == 0:
        sections = np.array([[kd, 0.0, 0.0, 1.0, 0.0, 0.0]])
    else:
        sections = scipy.signal.zpk2sos(zd, pd, kd)
    return DiscreteSos(np.asarray(sections, dtype=float), ts)


def save_tf_json(tf: RationalTf, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(tf.to_json_dict(), fh, indent=2)


def load_tf_json(path) -> RationalTf:
    with open(path, "r", encoding="ascii") as fh:
        return RationalTf.from_json_dict(json.load(fh))
