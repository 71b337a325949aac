"""Time-domain validation of the frequency-domain predictions.

Two parts. First the oracle: drive the designed loop with sinusoids and
compare the FFT of the steady-state error against the sensitivity
harmonics. Then the motion scenario: a point-to-point move whose end
triggers a base-frame disturbance; the add-on shortens the settling
duration, cuts the stationary RMS, and collapses the spectral peak at the
mode frequency.

Run:  python demos/04_time_domain_validation.py
"""

import math
from pathlib import Path

import numpy as np

from resetloop import (
    DisturbanceSpec,
    NotchSpec,
    design_addon,
    error_psd,
    identity_element,
    make_trajectory,
    sensitivity_harmonics_at,
    settling_metrics,
    simulate_closed_loop,
    simulate_sinusoid_loop,
)
from resetloop.fixtures import (
    MODE_OMEGA,
    OMEGA_RES,
    baseline_controller,
    default_grid,
    default_plant,
)
from resetloop.svgplot import LinePlot

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

plant = default_plant()
c_l = baseline_controller(plant)
result = design_addon(plant.model, c_l, [NotchSpec(MODE_OMEGA, 1.0, 2.0)],
                      omega_l=50.0, a_rho=0.0, grid=default_grid(),
                      omega_res=OMEGA_RES)
loop = result.loop

# --- oracle: predicted vs simulated error harmonics -------------------------

print("sensitivity harmonics: prediction vs simulation")
print("  omega     |S1| pred   |S1| sim    err      |S3| pred   |S3| sim    err")
for w in (3.0, 10.0, 40.0):
    spp = 2048
    ts = 2 * math.pi / (w * spp)
    pred, _ = sensitivity_harmonics_at(loop.with_comparison_mode(ts, 1), w)
    rec = simulate_sinusoid_loop(plant=plant.model, element=loop.element, c1=loop.c1,
                                 c2=loop.c2, omega=w, samples_per_period=spp)
    s1p, s1s = abs(pred[1]), abs(rec.error_harmonic(1))
    s3p, s3s = abs(pred[3]), abs(rec.error_harmonic(3))
    print(f"  {w:5.1f}   {s1p:.3e}  {s1s:.3e}  {abs(s1p-s1s)/s1p:.1e}  "
          f"{s3p:.3e}  {s3s:.3e}  {abs(s3p-s3s)/s3p:.1e}")

# --- motion scenario ---------------------------------------------------------

fs = 500.0
traj = make_trajectory(distance=1.0, move_duration=0.5, hold_duration=20.0,
                       fs=fs, bound=5e-4)
dist = DisturbanceSpec(amplitude=20.0, omega=MODE_OMEGA, decay=0.3, t_start=traj.t_r)


def run(element, c1, c2, label):
    sim = simulate_closed_loop(plant=plant.model, element=element, c1=c1, c2=c2,
                               r=traj.r, ts=1.0 / fs, disturbance=dist)
    metrics = settling_metrics(sim.t, sim.e, traj.regions[0], traj.bound)
    mask = (sim.t >= traj.t_r) & (sim.t <= traj.t_e)
    omega_psd, pxx = error_psd(sim.e[mask], fs)
    peak = float(pxx[int(np.argmin(np.abs(omega_psd - MODE_OMEGA)))])
    print(f"  {label:9s} T* = {metrics.t_star:5.2f} s   RMS = {metrics.rms:.3e}   "
          f"PSD@mode = {peak:.3e}")
    return sim, metrics, (omega_psd, pxx), peak


print("\nmotion run with base-frame disturbance triggered at motion end:")
base_sim, base_m, base_psd, base_peak = run(identity_element(), None, c_l, "baseline")
addon_sim, addon_m, addon_psd, addon_peak = run(loop.element, loop.c1, loop.c2, "add-on")
print(f"  improvements: T* {100*(addon_m.t_star-base_m.t_star)/base_m.t_star:+.1f}%, "
      f"RMS {100*(addon_m.rms-base_m.rms)/base_m.rms:+.1f}%, "
      f"PSD@mode {100*(addon_peak-base_peak)/base_peak:+.1f}%")

err = LinePlot("stationary-region error", "t (s)", "error")
err.xlog = False
mask = (base_sim.t >= traj.t_r - 1.0) & (base_sim.t <= traj.t_e)
err.add(base_sim.t[mask], base_sim.e[mask], "baseline", dashed=True)
err.add(addon_sim.t[mask], addon_sim.e[mask], "add-on")
err.write(OUT / "validation_error.svg")

psd = LinePlot("error PSD in the stationary region", "omega (rad/s)",
               "density", ylog=True)
psd.add(base_psd[0][1:], base_psd[1][1:], "baseline", dashed=True)
psd.add(addon_psd[0][1:], addon_psd[1][1:], "add-on")
psd.write(OUT / "validation_psd.svg")

print(f"\nplots in {OUT}/: validation_error.svg, validation_psd.svg")
