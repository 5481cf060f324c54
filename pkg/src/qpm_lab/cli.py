"""qpm-lab command line: deterministic CSV/JSON data for every operation.

Output conventions: UTF-8, LF newlines, decimal point, every number
printed with 9 significant digits.  Tables open with a ``#``-prefixed
header line naming columns and units; scans are emitted in long format
(temperature, wavelength, branch, intensity).  Derived scalars follow
as ``# key = value`` footer comments.  Exit status: 0 success, 1 domain
error (single-line diagnostic on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import compensation, materials, polarization, qpm, spectra

MATERIAL_DIR_ENV = "QPM_LAB_MATERIAL_DIR"

#: Module operations exercised by each subcommand (directly or through a
#: documented call path); the test suite checks this table covers the
#: whole public operation surface.
DISPATCH = {
    "index": ("load_material", "refractive_index", "wavevector"),
    "period": ("load_material", "solve_poling_period", "delta_k"),
    "spectrum": ("load_material", "spdc_spectrum", "spdc_intensity",
                 "idler_wavelength", "expanded_length",
                 "solve_phasematched_signal"),
    "scan-crystal": ("load_material", "crystal_temperature_scan",
                     "insensitivity_report", "spdc_spectrum",
                     "solve_poling_period", "expanded_length"),
    "scan-pump": ("load_material", "pump_temperature_scan", "spdc_spectrum",
                  "expanded_length"),
    "compensate": ("load_material", "pair_phase",
                   "optimize_compensator_length", "solve_poling_period",
                   "spdc_spectrum"),
    "visibility": ("coincidence_curve", "visibility_from_extremes",
                   "visibility_from_phase"),
    "fidelity": ("fidelity_from_visibilities",),
}

OPERATIONS = frozenset(
    ["load_material", "refractive_index", "wavevector", "expanded_length",
     "idler_wavelength", "delta_k", "spdc_intensity", "solve_poling_period",
     "solve_phasematched_signal", "spdc_spectrum", "crystal_temperature_scan",
     "pump_temperature_scan", "insensitivity_report", "pair_phase",
     "optimize_compensator_length", "coincidence_curve",
     "visibility_from_extremes", "visibility_from_phase",
     "fidelity_from_visibilities"])

DOMAIN_ERRORS = (materials.MaterialError, qpm.PhasematchError,
                 spectra.SpectrumError, compensation.CompensationError,
                 polarization.PolarizationError, ValueError, OSError)


def fmt(value) -> str:
    """Format one number with 9 significant digits, keeping trailing zeros."""
    return format(float(value), "#.9g")


def _round9(value):
    return float(format(float(value), ".9g"))


def _scalar_doc(name: str, value: float) -> dict:
    return {"scalar": (name, float(value))}


def _table_doc(columns, rows, meta=None) -> dict:
    return {"columns": list(columns), "rows": rows, "meta": meta or {}}


def render(doc: dict, output_format: str) -> str:
    if output_format == "json":
        if "scalar" in doc:
            name, value = doc["scalar"]
            obj = {name: _round9(value)}
        else:
            obj = {"columns": doc["columns"],
                   "rows": [[_round9(c) if isinstance(c, (int, float)) else c
                             for c in row] for row in doc["rows"]]}
            for key, value in doc["meta"].items():
                obj[key] = _round9(value) if isinstance(value, (int, float)) else value
        return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
    if "scalar" in doc:
        return fmt(doc["scalar"][1]) + "\n"
    lines = ["# " + ",".join(doc["columns"])]
    for row in doc["rows"]:
        lines.append(",".join(fmt(c) if isinstance(c, (int, float)) else str(c)
                              for c in row))
    for key, value in doc["meta"].items():
        text = fmt(value) if isinstance(value, (int, float)) else str(value)
        lines.append(f"# {key} = {text}")
    return "\n".join(lines) + "\n"


def _resolve_material(spec: str, material_dir: str | None, require_axes=()):
    """Material by bundled name, by name in the search directory, or by path."""
    if spec.endswith(".mat") or os.sep in spec:
        return materials.load_material_file(spec, require_axes)
    directory = material_dir or os.environ.get(MATERIAL_DIR_ENV)
    if directory:
        candidate = Path(directory) / f"{spec}.mat"
        if candidate.is_file():
            return materials.load_material_file(candidate, require_axes)
    return materials.bundled_material(spec, require_axes)


def _wavelength_grid(args, centre_pump_um: float):
    return spectra.default_wavelength_grid(
        centre_pump_um, points=args.points,
        half_width_um=args.half_width_nm * 1e-3)


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_index(args) -> dict:
    m = _resolve_material(args.material, args.material_dir, (args.axis,))
    if args.max_nm < args.min_nm:
        raise ValueError("--max-nm must be >= --min-nm")
    count = int(round((args.max_nm - args.min_nm) / args.step_nm)) + 1
    rows = []
    for i in range(count):
        wl_nm = args.min_nm + i * args.step_nm
        wl_um = wl_nm * 1e-3
        n = m.refractive_index(args.axis, wl_um, args.temp_c)
        k = m.wavevector(args.axis, wl_um, args.temp_c)
        rows.append([wl_nm, n, k])
    meta = {"material": m.name, "axis": args.axis, "temp_c": args.temp_c}
    return _table_doc(["wavelength_nm", "n", "k_rad_per_um"], rows, meta)


def cmd_period(args) -> dict:
    m = _resolve_material(args.material, args.material_dir, qpm.DEFAULT_AXES[1:])
    lam = args.degenerate_nm * 1e-3
    period = qpm.solve_poling_period(m, lam, args.temp_c)
    # re-verify through the process-level mismatch before publishing
    process = qpm.QpmProcess.degenerate(m, lam, period, 10000.0, args.temp_c)
    if abs(qpm.delta_k(process)) >= qpm.ROOT_RESIDUAL:
        raise qpm.PhasematchError("period residual check failed")
    return _scalar_doc("period_um", period)


def _long_rows(axis_values, scan, row_label_transform=float):
    rows = []
    wl_nm = scan.wavelengths_um * 1e3
    for t, spectrum in zip(axis_values, scan.rows):
        for j in range(wl_nm.size):
            rows.append([row_label_transform(t), wl_nm[j], "Y",
                         spectrum.branch_y[j]])
            rows.append([row_label_transform(t), wl_nm[j], "Z",
                         spectrum.branch_z[j]])
    return rows


def cmd_spectrum(args) -> dict:
    m = _resolve_material(args.material, args.material_dir, qpm.DEFAULT_AXES)
    pump_um = args.pump_nm * 1e-3
    grid = _wavelength_grid(args, pump_um)
    spectrum = spectra.spdc_spectrum(m, pump_um, args.period_um,
                                     args.length_mm * 1e3, args.temp_c, grid)
    rows = []
    for j in range(grid.size):
        rows.append([grid[j] * 1e3, "Y", spectrum.branch_y[j]])
        rows.append([grid[j] * 1e3, "Z", spectrum.branch_z[j]])
    meta = {"peak_y_nm": spectrum.peak_y_um() * 1e3,
            "peak_z_nm": spectrum.peak_z_um() * 1e3}
    try:
        pairs = qpm.solve_phasematched_signal(m, pump_um, args.period_um,
                                              args.temp_c)
        meta["phasematched_pairs_nm"] = "; ".join(
            f"{s * 1e3:.6f}/{i * 1e3:.6f}" for s, i in pairs)
    except qpm.PhasematchError:
        meta["phasematched_pairs_nm"] = "none"
    return _table_doc(["wavelength_nm", "branch", "intensity"], rows, meta)


def _scan_config(args):
    m = _resolve_material(args.material, args.material_dir, qpm.DEFAULT_AXES)
    if args.degenerate_nm is not None:
        lam = args.degenerate_nm * 1e-3
        pump_um = lam / 2.0
        period = qpm.solve_poling_period(m, lam, args.solve_at_c)
    else:
        if args.pump_nm is None or args.period_um is None:
            raise ValueError(
                "give either --degenerate-nm or both --pump-nm and --period-um")
        pump_um = args.pump_nm * 1e-3
        period = args.period_um
    return m, pump_um, period


def cmd_scan_crystal(args) -> dict:
    m, pump_um, period = _scan_config(args)
    temps = np.arange(args.t_min, args.t_max + 0.5 * args.t_step, args.t_step)
    grid = _wavelength_grid(args, pump_um)
    scan = spectra.crystal_temperature_scan(m, pump_um, period,
                                            args.length_mm * 1e3, temps, grid)
    report = spectra.insensitivity_report(scan)
    meta = {"period_um": period, "pump_nm": pump_um * 1e3,
            "plateau_span_c": report.plateau_span_c,
            "plateau_range_c": ("none" if report.plateau_range_c is None else
                                f"{report.plateau_range_c[0]:g}..{report.plateau_range_c[1]:g}")}
    if args.report:
        rows = [[float(report.temperatures_c[i]),
                 report.peak_y_um[i] * 1e3,
                 report.peak_z_um[i] * 1e3,
                 report.separation_um[i] * 1e3,
                 report.fwhm_um[i] * 1e3]
                for i in range(report.temperatures_c.size)]
        return _table_doc(["temperature_c", "peak_y_nm", "peak_z_nm",
                           "separation_nm", "fwhm_nm"], rows, meta)
    rows = _long_rows(temps, scan)
    return _table_doc(["temperature_c", "wavelength_nm", "branch",
                       "intensity"], rows, meta)


def cmd_scan_pump(args) -> dict:
    m = _resolve_material(args.material, args.material_dir, qpm.DEFAULT_AXES)
    tuning = spectra.PumpTuningModel(args.laser_ref_c, args.pump_ref_nm * 1e-3,
                                     args.rate_nm_per_c)
    temps = np.arange(args.t_min, args.t_max + 0.5 * args.t_step, args.t_step)
    grid = _wavelength_grid(args, tuning.reference_wavelength_um)
    scan = spectra.pump_temperature_scan(m, tuning, args.period_um,
                                         args.length_mm * 1e3,
                                         args.crystal_temp_c, temps, grid)
    meta = {"period_um": args.period_um,
            "crystal_temp_c": args.crystal_temp_c,
            "rate_nm_per_c": args.rate_nm_per_c}
    rows = _long_rows(temps, scan)
    return _table_doc(["laser_temperature_c", "wavelength_nm", "branch",
                       "intensity"], rows, meta)


def cmd_compensate(args) -> dict:
    m = _resolve_material(args.material, args.material_dir, qpm.DEFAULT_AXES)
    comp = _resolve_material(args.comp_material, args.material_dir, ("o", "e"))
    pump_um = args.pump_nm * 1e-3
    length_um = args.length_mm * 1e3
    period = args.period_um
    if period is None:
        period = qpm.solve_poling_period(m, 2.0 * pump_um, args.temp_c)
    if args.band_nm is not None:
        band = (args.band_nm[0] * 1e-3, args.band_nm[1] * 1e-3)
    else:
        band = compensation.default_band(m, pump_um, period, length_um,
                                         args.temp_c)
    best_um, residual = compensation.optimize_compensator_length(
        m, comp, pump_um, args.temp_c, length_um, band,
        max_length_um=args.max_comp_mm * 1e3)
    bare = compensation.phase_profile(m, pump_um, args.temp_c, length_um, band)
    spec = compensation.CompensatorSpec(comp, best_um)
    fixed = compensation.phase_profile(m, pump_um, args.temp_c, length_um,
                                       band, compensator=spec)
    rows = [[bare.wavelengths_um[i] * 1e3, bare.phase_deg[i],
             fixed.phase_deg[i]] for i in range(bare.wavelengths_um.size)]
    meta = {"compensator_um": best_um,
            "residual_deg": residual,
            "uncompensated_max_deg": float(np.max(np.abs(bare.phase_deg))),
            "band_nm": f"{band[0] * 1e3:.6f}..{band[1] * 1e3:.6f}",
            "period_um": period}
    return _table_doc(["wavelength_nm", "phase_uncompensated_deg",
                       "phase_compensated_deg"], rows, meta)


def cmd_visibility(args) -> dict:
    if args.mode == "curve":
        state = polarization.TwoPhotonState(args.v_hv, args.v_plus,
                                            args.v_minus, args.mean_rate)
        count = int(np.floor((args.stop_deg - args.start_deg)
                             / args.step_deg + 1e-9)) + 1
        angles = args.start_deg + args.step_deg * np.arange(count)
        rates = polarization.coincidence_curve(state, args.idler_angle_deg,
                                               angles)
        rows = [[angles[i], rates[i]] for i in range(count)]
        meta = {"idler_angle_deg": args.idler_angle_deg}
        return _table_doc(["signal_angle_deg", "rate"], rows, meta)
    if args.mode == "from-extremes":
        value = polarization.visibility_from_extremes(
            args.rate_max, args.rate_min, args.acc_max, args.acc_min)
        return _scalar_doc("visibility", value)
    # from-phase
    spec_data = np.loadtxt(args.spectrum_csv, delimiter=",", comments="#",
                           ndmin=2)
    phase_data = np.loadtxt(args.phase_csv, delimiter=",", comments="#",
                            ndmin=2)
    wl = spec_data[:, 0] * 1e-3
    weights = spec_data[:, 1]
    profile = compensation.PhaseProfile(phase_data[:, 0] * 1e-3,
                                        phase_data[:, 1])
    value = polarization.visibility_from_phase((wl, weights), profile)
    return _scalar_doc("visibility", value)


def cmd_fidelity(args) -> dict:
    value = polarization.fidelity_from_visibilities(args.v_hv, args.v_plus,
                                                    args.v_minus)
    return _scalar_doc("fidelity", value)


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format (default csv)")
    p.add_argument("--out", default="-", metavar="PATH",
                   help="output destination, '-' for stdout")
    p.add_argument("--material-dir", default=None, metavar="DIR",
                   help=f"material search directory (else ${MATERIAL_DIR_ENV}, "
                        "else bundled data)")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--points", type=int, default=spectra.DEFAULT_GRID_POINTS)
    p.add_argument("--half-width-nm", type=float,
                   default=spectra.DEFAULT_GRID_HALF_WIDTH_UM * 1e3)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpm-lab",
        description="Type II quasi-phasematched SPDC design toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="refractive index table")
    p.add_argument("--material", default="ktp")
    p.add_argument("--axis", required=True)
    p.add_argument("--min-nm", type=float, required=True)
    p.add_argument("--max-nm", type=float, required=True)
    p.add_argument("--step-nm", type=float, default=1.0)
    p.add_argument("--temp-c", type=float, default=25.0)
    _add_common(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("period", help="poling period for degenerate emission")
    p.add_argument("--material", default="ktp")
    p.add_argument("--degenerate-nm", type=float, required=True)
    p.add_argument("--temp-c", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("spectrum", help="SPDC emission spectrum")
    p.add_argument("--material", default="ktp")
    p.add_argument("--pump-nm", type=float, required=True)
    p.add_argument("--period-um", type=float, required=True)
    p.add_argument("--length-mm", type=float, required=True)
    p.add_argument("--temp-c", type=float, required=True)
    _add_grid(p)
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("scan-crystal",
                       help="spectra vs crystal temperature + insensitivity")
    p.add_argument("--material", default="ktp")
    p.add_argument("--pump-nm", type=float, default=None)
    p.add_argument("--period-um", type=float, default=None)
    p.add_argument("--degenerate-nm", type=float, default=None,
                   help="solve the period for this degenerate wavelength")
    p.add_argument("--solve-at-c", type=float, default=60.0,
                   help="temperature at which --degenerate-nm is matched")
    p.add_argument("--length-mm", type=float, required=True)
    p.add_argument("--t-min", type=float, required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--t-step", type=float, default=2.0)
    p.add_argument("--report", action="store_true",
                   help="emit the per-temperature peak report instead of spectra")
    _add_grid(p)
    _add_common(p)
    p.set_defaults(func=cmd_scan_crystal)

    p = sub.add_parser("scan-pump", help="spectra vs pump-laser temperature")
    p.add_argument("--material", default="ktp")
    p.add_argument("--period-um", type=float, required=True)
    p.add_argument("--length-mm", type=float, required=True)
    p.add_argument("--crystal-temp-c", type=float, required=True)
    p.add_argument("--laser-ref-c", type=float, required=True)
    p.add_argument("--pump-ref-nm", type=float, required=True)
    p.add_argument("--rate-nm-per-c", type=float, required=True)
    p.add_argument("--t-min", type=float, required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--t-step", type=float, default=1.0)
    _add_grid(p)
    _add_common(p)
    p.set_defaults(func=cmd_scan_pump)

    p = sub.add_parser("compensate",
                       help="pair-phase profile and compensator optimization")
    p.add_argument("--material", default="ktp")
    p.add_argument("--comp-material", default="yvo4")
    p.add_argument("--pump-nm", type=float, required=True)
    p.add_argument("--temp-c", type=float, required=True)
    p.add_argument("--length-mm", type=float, required=True)
    p.add_argument("--period-um", type=float, default=None,
                   help="poling period (default: solved for degeneracy)")
    p.add_argument("--band-nm", type=float, nargs=2, default=None,
                   metavar=("LO", "HI"))
    p.add_argument("--max-comp-mm", type=float, default=20.0)
    _add_common(p)
    p.set_defaults(func=cmd_compensate)

    p = sub.add_parser("visibility",
                       help="coincidence curves and visibility estimators")
    p.add_argument("--mode", choices=("curve", "from-extremes", "from-phase"),
                   required=True)
    p.add_argument("--v-hv", type=float, default=1.0)
    p.add_argument("--v-plus", type=float, default=1.0)
    p.add_argument("--v-minus", type=float, default=1.0)
    p.add_argument("--mean-rate", type=float, default=1.0)
    p.add_argument("--idler-angle-deg", type=float, default=0.0)
    p.add_argument("--start-deg", type=float, default=0.0)
    p.add_argument("--stop-deg", type=float, default=180.0)
    p.add_argument("--step-deg", type=float, default=1.0)
    p.add_argument("--rate-max", type=float, default=None)
    p.add_argument("--rate-min", type=float, default=None)
    p.add_argument("--acc-max", type=float, default=0.0)
    p.add_argument("--acc-min", type=float, default=0.0)
    p.add_argument("--spectrum-csv", default=None, metavar="PATH",
                   help="two columns: wavelength_nm,weight")
    p.add_argument("--phase-csv", default=None, metavar="PATH",
                   help="two columns: wavelength_nm,phase_deg")
    _add_common(p)
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("fidelity", help="fidelity from three visibilities")
    p.add_argument("--v-hv", type=float, required=True)
    p.add_argument("--v-plus", type=float, required=True)
    p.add_argument("--v-minus", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_fidelity)

    return parser


def _validate_mode_args(args) -> None:
    if getattr(args, "command", "") == "visibility":
        if args.mode == "from-extremes":
            if args.rate_max is None or args.rate_min is None:
                raise ValueError("--mode from-extremes needs --rate-max and --rate-min")
        if args.mode == "from-phase":
            if not args.spectrum_csv or not args.phase_csv:
                raise ValueError("--mode from-phase needs --spectrum-csv and --phase-csv")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate_mode_args(args)
        doc = args.func(args)
        text = render(doc, args.format)
    except DOMAIN_ERRORS as exc:
        print(f"qpm-lab: error: {exc}", file=sys.stderr)
        return 1
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
