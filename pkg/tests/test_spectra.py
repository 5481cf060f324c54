import numpy as np
import pytest

import qpm_lab as q
from qpm_lab.spectra import (
    PumpTuningModel,
    SpectrumError,
    branch_fwhm,
    crystal_temperature_scan,
    default_wavelength_grid,
    insensitivity_report,
    pump_temperature_scan,
    spdc_spectrum,
)

SYNTHETIC_FLAT = """
[material]
name = "flat"

[axis.Y]
form = "two_pole"
coefficients = 3.24, 0.0, 0.04, 0.0, 40.0
range_um = 0.4, 3.0

[axis.Z]
form = "two_pole"
coefficients = 4.0, 0.0, 0.04, 0.0, 40.0
range_um = 0.4, 3.0
"""


@pytest.fixture(scope="module")
def o_band(ktp):
    """Solved degenerate configuration at 1328 nm / 22 C."""
    period = q.solve_poling_period(ktp, 1.328, 22.0)
    return {"pump": 0.664, "period": period, "length": 10000.0, "temp": 22.0}


def test_degenerate_spectrum_peaks_at_twice_pump(ktp, o_band):
    grid = np.linspace(1.318, 1.338, 2001)  # odd count puts 1.328 on-grid
    spectrum = spdc_spectrum(ktp, o_band["pump"], o_band["period"],
                             o_band["length"], o_band["temp"], grid)
    assert spectrum.peak_y_um() == pytest.approx(1.328, abs=1e-12)
    assert spectrum.peak_z_um() == pytest.approx(1.328, abs=1e-12)
    assert spectrum.branch_y.max() >= 1.0 - 1e-9
    assert spectrum.branch_z.max() >= 1.0 - 1e-9


def test_o_band_crystal_spectrum_straddles_1316(ktp):
    spectrum = spdc_spectrum(ktp, 0.658, 54.05, 10000.0, 22.0)
    py, pz = spectrum.peak_y_um(), spectrum.peak_z_um()
    assert 0.5 * (py + pz) == pytest.approx(1.316, abs=0.002)
    step = float(np.diff(spectrum.wavelengths_um)[0])
    assert py <= 1.316 + step and pz >= 1.316 - step


def test_peaks_match_root_solver(ktp, o_band):
    for temp in (22.0, 50.0, 80.0):
        spectrum = spdc_spectrum(ktp, o_band["pump"], o_band["period"],
                                 o_band["length"], temp)
        step = float(np.diff(spectrum.wavelengths_um)[0])
        pairs = q.solve_phasematched_signal(ktp, o_band["pump"],
                                            o_band["period"], temp)
        assert min(abs(spectrum.peak_y_um() - s) for s, _ in pairs) <= step
        assert min(abs(spectrum.peak_z_um() - i) for _, i in pairs) <= step


def test_intensity_bounds_and_unit_peak_rule(ktp, o_band):
    grid = np.linspace(1.318, 1.338, 2001)
    spectrum = spdc_spectrum(ktp, o_band["pump"], o_band["period"],
                             o_band["length"], o_band["temp"], grid)
    for branch in (spectrum.branch_y, spectrum.branch_z):
        assert np.all(branch >= 0.0) and np.all(branch <= 1.0)
    assert np.all(spectrum.total <= 1.0)
    # intensity reaches 1 only where the residual is essentially zero
    ones = spectrum.branch_y == 1.0
    if np.any(ones):
        lam = spectrum.wavelengths_um[ones]
        dk = q.phase_mismatch(ktp, o_band["pump"], lam,
                              q.idler_wavelength(o_band["pump"], lam),
                              o_band["period"], o_band["temp"])
        assert np.all(np.abs(dk) < 1e-9)


def test_out_of_range_partners_are_flagged(ktp):
    # a grid reaching past the fitted window: flagged, zero, no raise
    period = q.solve_poling_period(ktp, 1.550, 60.0)
    spectrum = spdc_spectrum(ktp, 0.775, period, 10000.0, 60.0)
    outside = spectrum.wavelengths_um > 1.6
    assert np.any(outside)
    assert not np.any(spectrum.valid_y[outside])
    assert np.all(spectrum.branch_y[outside] == 0.0)
    inside = ~outside & spectrum.valid_y
    assert np.any(inside)


def test_grid_refinement_stability(ktp, o_band):
    for temp in (30.0, 70.0):
        coarse = default_wavelength_grid(o_band["pump"], points=1024)
        fine = default_wavelength_grid(o_band["pump"], points=2048)
        step = float(np.diff(coarse)[0])
        a = spdc_spectrum(ktp, o_band["pump"], o_band["period"],
                          o_band["length"], temp, coarse)
        b = spdc_spectrum(ktp, o_band["pump"], o_band["period"],
                          o_band["length"], temp, fine)
        assert abs(a.peak_y_um() - b.peak_y_um()) < step
        assert abs(a.peak_z_um() - b.peak_z_um()) < step


def test_spectrum_errors(ktp):
    with pytest.raises(SpectrumError, match="empty"):
        spdc_spectrum(ktp, 0.664, 54.0, 10000.0, 22.0, np.array([]))
    with pytest.raises(SpectrumError, match="increasing"):
        spdc_spectrum(ktp, 0.664, 54.0, 10000.0, 22.0,
                      np.array([1.33, 1.32, 1.31]))
    with pytest.raises(SpectrumError, match="pump"):
        spdc_spectrum(ktp, 0.40, 54.0, 10000.0, 22.0)


# ------------------------------------------------------------------ scans

def test_scan_of_length_one_equals_single_spectrum(ktp, o_band):
    grid = default_wavelength_grid(o_band["pump"])
    scan = crystal_temperature_scan(ktp, o_band["pump"], o_band["period"],
                                    o_band["length"], [22.0], grid)
    single = spdc_spectrum(ktp, o_band["pump"], o_band["period"],
                           o_band["length"], 22.0, grid)
    assert len(scan.rows) == 1
    assert np.array_equal(scan.rows[0].branch_y, single.branch_y)
    assert np.array_equal(scan.rows[0].branch_z, single.branch_z)


def test_scan_determinism_and_row_independence(ktp, o_band):
    temps = np.arange(20.0, 61.0, 10.0)
    grid = default_wavelength_grid(o_band["pump"], points=512)
    one = crystal_temperature_scan(ktp, o_band["pump"], o_band["period"],
                                   o_band["length"], temps, grid)
    two = crystal_temperature_scan(ktp, o_band["pump"], o_band["period"],
                                   o_band["length"], temps, grid)
    for r1, r2 in zip(one.rows, two.rows):
        assert np.array_equal(r1.branch_y, r2.branch_y)
        assert np.array_equal(r1.branch_z, r2.branch_z)
    # each row is exactly an independent single-spectrum evaluation
    mid = spdc_spectrum(ktp, o_band["pump"], o_band["period"],
                        o_band["length"], float(temps[2]), grid)
    assert np.array_equal(one.rows[2].branch_y, mid.branch_y)


def test_scan_preconditions(ktp, o_band):
    with pytest.raises(SpectrumError, match="increasing"):
        crystal_temperature_scan(ktp, o_band["pump"], o_band["period"],
                                 o_band["length"], [40.0, 30.0])
    with pytest.raises(SpectrumError, match="within"):
        crystal_temperature_scan(ktp, o_band["pump"], o_band["period"],
                                 o_band["length"], [-40.0, 20.0])


def test_pump_scan_rate_zero_rows_identical(ktp):
    tuning = PumpTuningModel(60.0, 0.664, 0.0)
    scan = pump_temperature_scan(ktp, tuning, 54.05, 10000.0, 22.0,
                                 np.arange(40.0, 81.0, 10.0))
    first = scan.rows[0]
    for row in scan.rows[1:]:
        assert np.array_equal(row.branch_y, first.branch_y)
        assert np.array_equal(row.branch_z, first.branch_z)


def test_pump_scan_convergence_at_crossing(ktp):
    # branches merge where the pump reaches the crystal's degeneracy
    # point and separate linearly away from it
    pump_star = q.degenerate_pump_wavelength(ktp, 54.05, 22.0)
    tuning = PumpTuningModel(60.2, 0.664, 0.18)
    t_star = 60.2 + (pump_star - 0.664) * 1e3 / 0.18
    temps = np.arange(t_star - 20.0, t_star + 20.5, 2.0)
    scan = pump_temperature_scan(ktp, tuning, 54.05, 10000.0, 22.0, temps)
    seps = np.array([abs(r.peak_y_um() - r.peak_z_um()) for r in scan.rows])
    fwhm = branch_fwhm(scan.rows[0].wavelengths_um, scan.rows[0].branch_y)
    nearest = int(np.argmin(np.abs(temps - t_star)))
    assert seps[nearest] < fwhm  # merged at the crossing
    below = seps[:nearest]
    assert np.all(np.diff(below) < 0)  # separation shrinks as T_L rises
    assert below[0] > 5 * fwhm


# ----------------------------------------------------------------- report

def test_insensitivity_report_synthetic_identical_rows():
    flat = q.load_material(SYNTHETIC_FLAT)
    period = q.solve_poling_period(flat, 1.328, 25.0)
    temps = np.arange(0.0, 101.0, 10.0)
    scan = crystal_temperature_scan(flat, 0.664, period, 10000.0, temps)
    report = insensitivity_report(scan)
    assert report.plateau_span_c == pytest.approx(100.0)
    assert report.plateau_range_c == (0.0, 100.0)
    assert np.all(report.separation_um == 0.0)


def test_insensitivity_report_requires_crystal_kind(ktp):
    tuning = PumpTuningModel(60.0, 0.664, 0.18)
    scan = pump_temperature_scan(ktp, tuning, 54.05, 10000.0, 22.0,
                                 [50.0, 60.0])
    with pytest.raises(SpectrumError, match="crystal"):
        insensitivity_report(scan)


def test_insensitivity_report_rejects_tiny_grid(ktp, o_band):
    scan = crystal_temperature_scan(ktp, o_band["pump"], o_band["period"],
                                    o_band["length"], [22.0],
                                    np.array([1.327, 1.329]))
    with pytest.raises(SpectrumError, match="grid"):
        insensitivity_report(scan)


def test_plateau_ordering_1064_narrower_than_1165(ktp):
    temps = np.arange(20.0, 111.0, 5.0)
    spans = {}
    for lam in (1.064, 1.165):
        period = q.solve_poling_period(ktp, lam, 60.0)
        scan = crystal_temperature_scan(ktp, lam / 2, period, 10000.0,
                                        temps,
                                        default_wavelength_grid(lam / 2, 1024))
        spans[lam] = insensitivity_report(scan).plateau_span_c
    assert spans[1.064] < spans[1.165]


def test_fwhm_triangle():
    wl = np.array([1.0, 1.1, 1.2, 1.3, 1.4])
    y = np.array([0.0, 0.5, 1.0, 0.5, 0.0])
    assert branch_fwhm(wl, y) == pytest.approx(0.2, abs=1e-12)
    with pytest.raises(SpectrumError):
        branch_fwhm(wl[:2], y[:2])


def test_fwhm_against_sinc_width(ktp, o_band):
    # analytic width of sinc^2 in the residual, mapped through the local
    # dispersion slope, agrees with the sampled estimate
    grid = np.linspace(1.318, 1.338, 4001)
    spectrum = spdc_spectrum(ktp, o_band["pump"], o_band["period"],
                             o_band["length"], o_band["temp"], grid)
    measured = branch_fwhm(grid, spectrum.branch_y)
    length = ktp.expanded_length(o_band["length"], o_band["temp"])
    half_arg = 2.7831  # x with sinc^2(x/2) = 1/2
    eps = 1e-5
    slope = (float(q.phase_mismatch(ktp, 0.664, 1.328 + eps,
                                    q.idler_wavelength(0.664, 1.328 + eps),
                                    o_band["period"], 22.0))
             - float(q.phase_mismatch(ktp, 0.664, 1.328 - eps,
                                      q.idler_wavelength(0.664, 1.328 - eps),
                                      o_band["period"], 22.0))) / (2 * eps)
    expected = 2 * half_arg / length / abs(slope)
    assert measured == pytest.approx(expected, rel=0.02)
