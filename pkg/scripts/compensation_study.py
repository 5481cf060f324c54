"""Pair-phase compensation for the O-band source and its entanglement cost.

A 10 mm crystal degenerate at 1328 nm leaves photon pairs born at its
centre with a steep wavelength-dependent relative phase.  An
axis-swapped YVO4 crystal of optimized length flattens the phase across
the emission band; the script also converts residual phase into the
predicted diagonal-basis visibility and plots the analyzer fringes for
the measured visibility set.

Writes out/compensation_study.png.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import qpm_lab as q
from qpm_lab import CompensatorSpec, TwoPhotonState

OUT = pathlib.Path(__file__).resolve().parent.parent / "out"
PUMP_UM = 0.664
TEMP_C = 22.0
LENGTH_UM = 10000.0

ktp = q.bundled_material("ktp")
yvo4 = q.bundled_material("yvo4")

period = q.solve_poling_period(ktp, 2 * PUMP_UM, TEMP_C)
band = q.default_band(ktp, PUMP_UM, period, LENGTH_UM, TEMP_C)
best_um, residual = q.optimize_compensator_length(ktp, yvo4, PUMP_UM, TEMP_C,
                                                  LENGTH_UM, band)
print(f"optimum compensator: {best_um / 1e3:.4f} mm, residual "
      f"{residual:.4f} deg over [{band[0] * 1e3:.2f}, {band[1] * 1e3:.2f}] nm")

bare = q.phase_profile(ktp, PUMP_UM, TEMP_C, LENGTH_UM, band)
fixed = q.phase_profile(ktp, PUMP_UM, TEMP_C, LENGTH_UM, band,
                        compensator=CompensatorSpec(yvo4, best_um))

grid = np.linspace(band[0], band[1], 801)
spectrum = q.spdc_spectrum(ktp, PUMP_UM, period, LENGTH_UM, TEMP_C, grid)
v_pred = q.visibility_from_phase(spectrum, fixed)
print(f"predicted diagonal-basis visibility: {v_pred:.6f}")

fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
axes[0].plot(bare.wavelengths_um * 1e3, bare.phase_deg)
axes[0].set_title("uncompensated")
axes[0].set_xlabel("signal wavelength (nm)")
axes[0].set_ylabel("pair phase (deg)")

axes[1].plot(fixed.wavelengths_um * 1e3, fixed.phase_deg)
axes[1].set_title(f"with {best_um / 1e3:.2f} mm compensator")
axes[1].set_xlabel("signal wavelength (nm)")

state = TwoPhotonState(1.0, 0.954, 0.974, mean_rate=1.0)
angles = np.arange(0.0, 361.0, 2.0)
for alpha, label in ((0.0, "H"), (90.0, "V"), (45.0, "+45"), (-45.0, "-45")):
    axes[2].plot(angles, q.coincidence_curve(state, alpha, angles),
                 label=label)
axes[2].set_title("analyzer fringes")
axes[2].set_xlabel("signal analyzer angle (deg)")
axes[2].set_ylabel("normalized rate")
axes[2].legend(fontsize=8)

OUT.mkdir(exist_ok=True)
fig.tight_layout()
fig.savefig(OUT / "compensation_study.png", dpi=150)
print(f"wrote {OUT / 'compensation_study.png'}")
