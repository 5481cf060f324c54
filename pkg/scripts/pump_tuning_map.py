"""SPDC spectrum versus pump-laser temperature for a 54.05 um crystal.

The crystal is held at 22 C while the pump wavelength follows the laser
diode temperature at 0.18 nm/C.  The signal and idler branches converge
and cross where the pump reaches the crystal's degeneracy point; the
crossing temperature is derived from the bundled coefficient sets.

Writes out/pump_tuning_map.png.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import qpm_lab as q
from qpm_lab import PumpTuningModel

OUT = pathlib.Path(__file__).resolve().parent.parent / "out"
PERIOD_UM = 54.05
CRYSTAL_C = 22.0
RATE_NM_PER_C = 0.18
LASER_REF_C = 60.2
PUMP_REF_UM = 0.664

ktp = q.bundled_material("ktp")
tuning = PumpTuningModel(LASER_REF_C, PUMP_REF_UM, RATE_NM_PER_C)

pump_star = q.degenerate_pump_wavelength(ktp, PERIOD_UM, CRYSTAL_C)
t_star = LASER_REF_C + (pump_star - PUMP_REF_UM) * 1e3 / RATE_NM_PER_C
print(f"degenerate pump {pump_star * 1e3:.3f} nm -> laser {t_star:.1f} C")

temps = np.arange(t_star - 30.0, t_star + 10.1, 0.5)
grid = q.default_wavelength_grid(pump_star, points=1024)
scan = q.pump_temperature_scan(ktp, tuning, PERIOD_UM, 10000.0, CRYSTAL_C,
                               temps, grid)
image = np.stack([row.total for row in scan.rows], axis=1)

fig, ax = plt.subplots(figsize=(7, 4.5))
ax.pcolormesh(temps, grid * 1e3, image, cmap="inferno", shading="auto")
ax.axvline(t_star, color="w", ls="--", lw=0.8)
ax.set_xlabel("laser temperature (C)")
ax.set_ylabel("wavelength (nm)")
ax.set_title(f"$\\Lambda$ = {PERIOD_UM} um, crystal {CRYSTAL_C} C, "
             f"{RATE_NM_PER_C} nm/C tuning")

OUT.mkdir(exist_ok=True)
fig.tight_layout()
fig.savefig(OUT / "pump_tuning_map.png", dpi=150)
print(f"wrote {OUT / 'pump_tuning_map.png'}")
