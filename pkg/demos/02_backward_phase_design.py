"""Backward design of the constant-gain lead filter.

Given the lag corner, the reset value, and a phase you need at one
frequency, the quadratic backward calculation returns the lead corner that
delivers it exactly - no iteration. This script sweeps the feasible phase
range, shows the corner growing without bound toward the maximum, and
verifies the round trip.

Run:  python demos/02_backward_phase_design.py
"""

import math
from pathlib import Path

import numpy as np

from resetloop import (
    PhaseTarget,
    cglp_hosidf,
    harmonic_ratio,
    make_cglp,
    solve_omega_f,
    theta_cglp,
    theta_max,
)
from resetloop.svgplot import LinePlot, db

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

omega_l = 1.0
a_rho = 0.0
omega_c = 3.0
t_max = theta_max(omega_l, a_rho, omega_c)
print(f"lag corner {omega_l} rad/s, reset value {a_rho}, target frequency {omega_c} rad/s")
print(f"maximum achievable phase: {math.degrees(t_max):.2f} deg\n")

print("fraction   requested    lead corner    realized      error")
for frac in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99):
    theta = frac * t_max
    omega_f = solve_omega_f(omega_l, a_rho, PhaseTarget(omega_c, theta))
    got = theta_cglp(make_cglp(omega_l, omega_f, a_rho), omega_c)
    print(f"  {frac:4.2f}     {math.degrees(theta):7.3f} deg  {omega_f:12.4f}   "
          f"{math.degrees(got):8.3f} deg  {abs(got - theta):.1e} rad")

# --- gain flatness and harmonic content of one design -----------------------

design = make_cglp(omega_l, solve_omega_f(omega_l, a_rho,
                                          PhaseTarget(omega_c, 0.5 * t_max)), a_rho)
print(f"\nchosen design: omega_f={design.omega_f:.4f}, k_c={design.k_c:.4f}, "
      f"feedthrough={design.d_r:.4f}, reset corner {design.omega_r:.4f}")
print(f"unity-gain closure: k_c(D_r+1)-1 = {design.k_c * (design.d_r + 1) - 1:.1e}, "
      f"k_c D_r wf/wl - 1 = {design.k_c * design.d_r * design.omega_f / design.omega_l - 1:.1e}")

grid = np.geomspace(omega_l / 1000, 1000 * design.omega_f, 300)
gain = LinePlot("constant-gain lead filter: first harmonic", "omega (rad/s)",
                "magnitude (dB)")
gain.add(grid, db([abs(cglp_hosidf(design, float(w), 1)) for w in grid]), "|c1|")
gain.write(OUT / "cglp_gain.svg")

phase = LinePlot("phase of the first harmonic", "omega (rad/s)", "phase (deg)")
phase.add(grid, [math.degrees(np.angle(cglp_hosidf(design, float(w), 1))) for w in grid],
          "angle c1")
phase.write(OUT / "cglp_phase.svg")

conventional = make_cglp(design.omega_l, design.omega_f, a_rho, feedthrough=False)
ratio = LinePlot("third-over-first harmonic ratio", "omega (rad/s)", "ratio (%)")
ratio.add(grid, harmonic_ratio(design, grid), "with feedthrough")
ratio.add(grid, harmonic_ratio(conventional, grid), "without feedthrough", dashed=True)
ratio.write(OUT / "cglp_harmonic_ratio.svg")

print(f"\nplots in {OUT}/: cglp_gain.svg, cglp_phase.svg, cglp_harmonic_ratio.svg")
