"""Describing functions of reset elements, checked against simulation.

The reset integrator keeps an integrator's gain slope but lags only ~38
degrees instead of 90. A first-order reset element with nonzero reset
values interpolates between that and its ordinary linear filter. This
script prints the phases, then validates the harmonic formulas against the
brute-force time simulation and plots the spectra.

Run:  python demos/01_describing_functions.py
"""

import math
from pathlib import Path

import numpy as np

from resetloop import (
    bls_tf,
    clegg,
    eval_tf,
    gfore,
    hosidf_reset,
    simulate_sinusoid_steady,
)
from resetloop.svgplot import LinePlot, db

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# --- the reset integrator's phase advantage --------------------------------

print("reset integrator (Clegg) describing function:")
for w in (0.1, 1.0, 10.0):
    h1 = hosidf_reset(clegg(), w, 1)
    lin = eval_tf(bls_tf(clegg()), w)
    print(f"  w={w:6.2f}  |H1|={abs(h1):.4f} (linear {abs(lin):.4f})   "
          f"phase {math.degrees(np.angle(h1)):7.2f} deg (linear {math.degrees(np.angle(lin)):7.2f})")

# --- harmonics of a first-order reset element vs simulation ----------------

el = gfore(omega_r=1.0, a_rho=0.0)
w = 1.0
rec = simulate_sinusoid_steady(el, w, samples_per_period=2048)
print(f"\nfirst-order reset element at w={w}: {rec.resets_per_period} resets/period, "
      f"converged in {rec.periods_run} periods")
print("harmonic   formula              simulated            |err|/|H1|")
h1_mag = abs(hosidf_reset(el, w, 1))
for n in (1, 3, 5, 7):
    formula = hosidf_reset(el, w, n)
    simulated = rec.harmonic(n)
    err = abs(formula - simulated) / h1_mag
    print(f"  {n}       {formula:.5f}   {simulated:.5f}   {err:.2e}")

# --- plots ------------------------------------------------------------------

grid = np.geomspace(0.01, 100.0, 200)
plot = LinePlot("first-order reset element: harmonic describing functions",
                "omega (rad/s)", "magnitude (dB)")
for n in (1, 3, 5):
    mags = [abs(hosidf_reset(el, float(v), n)) for v in grid]
    plot.add(grid, db(np.maximum(mags, 1e-12)), f"harmonic {n}", dashed=(n > 1))
plot.write(OUT / "element_harmonics.svg")

wave = LinePlot("steady-state response to a unit sinusoid", "t (s)", "signal")
wave.xlog = False
wave.add(rec.t - rec.t[0], rec.e, "input")
wave.add(rec.t - rec.t[0], rec.u, "reset output")
wave.write(OUT / "element_waveform.svg")

print(f"\nplots in {OUT}/: element_harmonics.svg, element_waveform.svg")
