"""Thermally induced index and wavevector changes for the Type II process.

For degenerate targets at 1165 nm and 1310 nm (periods solved at 60 C),
plots the change relative to 60 C of the pump/signal/idler refractive
indices and of the pump versus summed signal+idler wavevectors.  The
compensatory behaviour of the summed wavevector change is what makes the
emission spectrum temperature-insensitive.

Writes out/thermal_response.png.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import qpm_lab as q

OUT = pathlib.Path(__file__).resolve().parent.parent / "out"
REFERENCE_C = 60.0
TARGETS_NM = (1165, 1310)

ktp = q.bundled_material("ktp")
temps = np.linspace(20.0, 120.0, 201)

fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
for col, target_nm in enumerate(TARGETS_NM):
    lam = target_nm * 1e-3
    pump = lam / 2
    period = q.solve_poling_period(ktp, lam, REFERENCE_C)

    dn_pump = [ktp.refractive_index("Y", pump, t)
               - ktp.refractive_index("Y", pump, REFERENCE_C) for t in temps]
    dn_sig = [ktp.refractive_index("Y", lam, t)
              - ktp.refractive_index("Y", lam, REFERENCE_C) for t in temps]
    dn_idl = [ktp.refractive_index("Z", lam, t)
              - ktp.refractive_index("Z", lam, REFERENCE_C) for t in temps]

    ax = axes[0, col]
    ax.plot(temps, np.array(dn_pump) * 1e4, label="pump (Y)")
    ax.plot(temps, np.array(dn_sig) * 1e4, label="signal (Y)")
    ax.plot(temps, np.array(dn_idl) * 1e4, label="idler (Z)")
    ax.set_title(f"degenerate {target_nm} nm,  $\\Lambda$ = {period:.1f} um")
    ax.set_ylabel(r"$\Delta n$ ($10^{-4}$)")
    ax.legend(fontsize=8)

    dk_pump = [ktp.wavevector("Y", pump, t)
               - ktp.wavevector("Y", pump, REFERENCE_C) for t in temps]
    dk_pair = [ktp.wavevector("Y", lam, t) + ktp.wavevector("Z", lam, t)
               - ktp.wavevector("Y", lam, REFERENCE_C)
               - ktp.wavevector("Z", lam, REFERENCE_C) for t in temps]
    ax = axes[1, col]
    ax.plot(temps, np.array(dk_pump) * 1e3, label="pump")
    ax.plot(temps, np.array(dk_pair) * 1e3, label="signal + idler")
    ax.set_xlabel("crystal temperature (C)")
    ax.set_ylabel(r"$\Delta k$ ($10^{-3}$ rad/um)")
    ax.legend(fontsize=8)

OUT.mkdir(exist_ok=True)
fig.tight_layout()
fig.savefig(OUT / "thermal_response.png", dpi=150)
print(f"wrote {OUT / 'thermal_response.png'}")
