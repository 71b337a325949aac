"""Construction of the constant-gain lead-phase (CgLp) filter and the
backward design calculation: maximum achievable phase and the corner
frequency omega_f that realizes a requested describing-function phase.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import InfeasiblePhaseError, NoSolutionError, ValidationError
from .harmonics import hosidf_reset
from .lti import RationalTf, make_lead
from .reset import ResetElement, gfore

# derived-field consistency tolerance for deserialized designs
DERIVED_TOL = 1e-9


def reset_corner(omega_l: float, a_rho: float) -> float:
    """DF corner of the reset lag that mimics a linear pole at omega_l."""
    bracket = 4.0 * (1.0 - a_rho) / (math.pi * (1.0 + a_rho))
    return omega_l / math.sqrt(1.0 + bracket * bracket)


@dataclass(frozen=True)
class CglpDesign:
    """The tuple (omega_l, omega_f, A_rho, c_f) with its derived quantities.

    Derived: omega_r (reset corner), k_c (series gain), d_r (feedthrough).
    The closure identities k_c (d_r + 1) = 1 and k_c d_r omega_f / omega_l = 1
    hold by construction; the lead corner actually used is omega_f / c_f.
    ``feedthrough=False`` zeroes d_r (the conventional variant used only for
    harmonic-ratio comparisons).
    """

    omega_l: float
    omega_f: float
    a_rho: float
    c_f: float = 1.0
    feedthrough: bool = True

    def __post_init__(self):
        if not (0.0 < self.omega_l < self.omega_f):
            raise ValidationError(
                f"need 0 < omega_l < omega_f, got ({self.omega_l}, {self.omega_f})"
            )
        if not (-1.0 < self.a_rho <= 1.0):
            raise ValidationError(f"A_rho must lie in (-1, 1], got {self.a_rho}")
        if self.c_f < 1.0:
            raise ValidationError(f"c_f must be >= 1, got {self.c_f}")

    @property
    def omega_r(self) -> float:
        return reset_corner(self.omega_l, self.a_rho)

    @property
    def k_c(self) -> float:
        return (self.omega_f - self.omega_l) / self.omega_f

    @property
    def d_r(self) -> float:
        if not self.feedthrough:
            return 0.0
        return self.omega_l / (self.omega_f - self.omega_l)

    def reset_element(self) -> ResetElement:
        return gfore(self.omega_r, self.a_rho, d_r=self.d_r, label="cglp-gfore")

    def lead_tf(self) -> RationalTf:
        """Lead filter with the c_f-detuned high corner omega_f / c_f."""
        return make_lead(self.omega_l, self.omega_f / self.c_f, label="cglp-lead")

    def to_json_dict(self) -> dict:
        return {
            "omega_l": self.omega_l,
            "omega_f": self.omega_f,
            "A_rho": self.a_rho,
            "c_f": self.c_f,
            "derived": {"omega_r": self.omega_r, "k_c": self.k_c, "D_r": self.d_r},
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "CglpDesign":
        design = cls(float(obj["omega_l"]), float(obj["omega_f"]),
                     float(obj["A_rho"]), float(obj.get("c_f", 1.0)))
        derived = obj.get("derived")
        if derived is not None:
            for key, actual in (("omega_r", design.omega_r), ("k_c", design.k_c),
                                ("D_r", design.d_r)):
                if key in derived:
                    stored = float(derived[key])
                    if abs(stored - actual) > DERIVED_TOL * max(1.0, abs(actual)):
                        raise ValidationError(
                            f"stored derived field {key}={stored!r} inconsistent with "
                            f"recomputed {actual!r} (tolerance {DERIVED_TOL:g})"
                        )
        return design


def make_cglp(
    omega_l: float,
    omega_f: float,
    a_rho: float,
    c_f: float = 1.0,
    *,
    feedthrough: bool = True,
) -> CglpDesign:
    """Validated CgLp design with all derived fields."""
    return CglpDesign(float(omega_l), float(omega_f), float(a_rho), float(c_f),
                      feedthrough=feedthrough)


@dataclass(frozen=True)
class PhaseTarget:
    """Requested describing-function phase (radians) at frequency omega_c."""

    omega_c: float
    theta: float

    def __post_init__(self):
        if self.omega_c <= 0:
            raise ValidationError(f"omega_c must be positive, got {self.omega_c}")


def phase_components(omega_l: float, a_rho: float, omega: float) -> tuple[float, float]:
    """Real and imaginary part of the reset element's first-harmonic response
    without feedthrough; both are independent of omega_f."""
    el = gfore(reset_corner(omega_l, a_rho), a_rho, d_r=0.0)
    h1 = hosidf_reset(el, omega, 1)
    return h1.real, h1.imag


def theta_cglp(design: CglpDesign, omega: float) -> float:
    """Describing-function phase (radians) of the CgLp at ``omega``.

    Closed form: atan(b / (a + d_r)) plus the lead phase with the design's
    detuned corner. Matches angle(cglp_hosidf(design, omega, 1)).
    """
    a, b = phase_components(design.omega_l, design.a_rho, omega)
    lead_hi = design.omega_f / design.c_f
    return (
        math.atan2(b, a + design.d_r)
        + math.atan(omega / design.omega_l)
        - math.atan(omega / lead_hi)
    )


def theta_max(omega_l: float, a_rho: float, omega: float) -> float:
    """Limit of the CgLp phase as omega_f grows without bound:
    atan(b/a) + atan(omega/omega_l)."""
    a, b = phase_components(omega_l, a_rho, omega)
    return math.atan2(b, a) + math.atan(omega / omega_l)


def solve_omega_f(omega_l: float, a_rho: float, target: PhaseTarget) -> float:
    """Corner frequency omega_f >= omega_l whose CgLp realizes ``target``.

    Solves the quadratic k1 wf^2 + k2 wf + k3 = 0 obtained from the phase
    equation; of the admissible roots in [omega_l, inf) the smaller is
    returned (ending the reset integrator action earlier keeps the
    higher-harmonic content down), otherwise the larger root.
    """
    omega = target.omega_c
    theta = target.theta
    t_max = theta_max(omega_l, a_rho, omega)
    if not (0.0 < theta < t_max):
        raise InfeasiblePhaseError(theta, t_max, omega)

    a, b = phase_components(omega_l, a_rho, omega)
    q = math.tan(theta - math.atan(omega / omega_l))
    k1 = a * q - b
    k2 = b * omega * q + b * omega_l + a * omega - (a - 1.0) * omega_l * q
    k3 = -omega * omega_l * (b * q + a - 1.0)

    if abs(k1) < 1e-12 * abs(k2):
        # quadratic collapses to linear
        if k2 == 0.0:
            raise NoSolutionError("degenerate phase equation (k1 = k2 = 0)")
        roots = [-k3 / k2]
    else:
        disc = k2 * k2 - 4.0 * k1 * k3
        if disc < 0.0:
            raise NoSolutionError(
                f"complex corner-frequency roots (discriminant {disc:.3e}) for a "
                "feasible target; numerical inconsistency"
            )
        sq = math.sqrt(disc)
        roots = [(-k2 - sq) / (2.0 * k1), (-k2 + sq) / (2.0 * k1)]

    admissible = [r for r in roots if r >= omega_l and math.isfinite(r)]
    if len(admissible) == len(roots) and len(roots) == 2:
        return min(admissible)
    if admissible:
        return max(admissible)
    raise NoSolutionError(
        f"no root >= omega_l={omega_l!r} (roots {roots}) for a feasible target; "
        "numerical inconsistency"
    )


def save_design_json(design: CglpDesign, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(design.to_json_dict(), fh, indent=2)


def load_design_json(path) -> CglpDesign:
    with open(path, "r", encoding="ascii") as fh:
        return CglpDesign.from_json_dict(json.load(fh))
