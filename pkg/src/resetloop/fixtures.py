"""Documented desk-scale fixtures: the default synthetic plant and its
baseline linear controller.

The plant is the two-mass base-frame model (mode at 5 rad/s, i.e. 5 % of
the intended 100 rad/s crossover); the baseline controller is a classic
tamed PID for a double-integrator mid-band:

    C_L(s) = k_p * (1 + omega_i/s) * (1 + s/omega_d) / (1 + s/omega_t)

with omega_d = omega_c/3, omega_t = 3*omega_c, omega_i = omega_c/10 and
k_p fixed so that |C_L G| = 1 at omega_c. The robustness split frequency
used with this pair is 300 rad/s (3*omega_c).
"""

from __future__ import annotations

import numpy as np

from .lti import RationalTf, eval_tf
from .sim import SyntheticPlant, two_mass_plant

CROSSOVER = 100.0          # rad/s design crossover of the baseline loop
OMEGA_RES = 300.0          # robustness split frequency used in configs
MODE_OMEGA = 5.0           # base-frame mode of the default plant


def default_plant() -> SyntheticPlant:
    return two_mass_plant(mode_omega=MODE_OMEGA)


def baseline_controller(plant: SyntheticPlant | None = None,
                        omega_c: float = CROSSOVER) -> RationalTf:
    """Tamed-PID baseline with unity loop gain at ``omega_c``."""
    plant = plant or default_plant()
    omega_d = omega_c / 3.0
    omega_t = 3.0 * omega_c
    omega_i = omega_c / 10.0
    # (1 + omega_i/s) = (s + omega_i)/s
    pi_part = RationalTf((1.0, omega_i), (1.0, 0.0), label="pi")
    lead = RationalTf((1.0 / omega_d, 1.0), (1.0 / omega_t, 1.0), label="lead")
    unscaled = pi_part * lead
    gain = 1.0 / abs(eval_tf(unscaled, omega_c) * eval_tf(plant.model, omega_c))
    c_l = gain * unscaled
    return RationalTf(c_l.num, c_l.den, label="baseline-pid")


def default_grid(points_per_decade: int = 24) -> np.ndarray:
    """Analysis grid spanning the fixture's band of interest."""
    return np.geomspace(0.5, 2000.0, int(np.round(points_per_decade * np.log10(2000 / 0.5))) + 1)
