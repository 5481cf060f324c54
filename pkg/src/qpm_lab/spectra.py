"""SPDC emission spectra and scans over crystal / pump-laser temperature.

A spectrum is sampled on a wavelength grid with one intensity per
polarization branch: ``branch_y[i]`` treats the grid point as the
signal-axis photon (its partner follows from energy conservation),
``branch_z[i]`` treats it as the idler-axis photon.  Grid points whose
partner falls outside the material's fitted window carry zero intensity
and a cleared validity flag instead of raising.

Scan rows are mutually independent; they are computed by identical
per-row evaluations in axis order, so results do not depend on any
parallel scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .materials import MaterialModel
from .qpm import DEFAULT_AXES, phase_mismatch, spdc_intensity

__all__ = [
    "SpectrumError",
    "SpectrumGrid",
    "TemperatureScan",
    "PumpTuningModel",
    "InsensitivityReport",
    "default_wavelength_grid",
    "spdc_spectrum",
    "crystal_temperature_scan",
    "pump_temperature_scan",
    "insensitivity_report",
    "branch_fwhm",
]

DEFAULT_GRID_POINTS = 2048
DEFAULT_GRID_HALF_WIDTH_UM = 0.060
TEMPERATURE_LIMITS_C = (-20.0, 200.0)


class SpectrumError(ValueError):
    """Invalid spectrum or scan request."""


@dataclass(frozen=True)
class SpectrumGrid:
    """Per-branch SPDC intensities over a common wavelength grid."""

    wavelengths_um: np.ndarray
    branch_y: np.ndarray
    branch_z: np.ndarray
    valid_y: np.ndarray
    valid_z: np.ndarray

    @property
    def total(self) -> np.ndarray:
        """Elementwise branch sum, clamped to the [0, 1] normalization."""
        return np.minimum(self.branch_y + self.branch_z, 1.0)

    def peak_y_um(self) -> float:
        return float(self.wavelengths_um[int(np.argmax(self.branch_y))])

    def peak_z_um(self) -> float:
        return float(self.wavelengths_um[int(np.argmax(self.branch_z))])


@dataclass(frozen=True)
class PumpTuningModel:
    """Linear pump-wavelength response to the laser temperature."""

    reference_temperature_c: float
    reference_wavelength_um: float
    rate_nm_per_c: float

    def pump_wavelength_um(self, laser_temperature_c):
        return (self.reference_wavelength_um
                + 1e-3 * self.rate_nm_per_c
                * (np.asarray(laser_temperature_c) - self.reference_temperature_c))


@dataclass(frozen=True)
class TemperatureScan:
    """Stack of spectra over a temperature axis on one shared grid."""

    kind: str  # "crystal" | "pump-laser"
    axis_values_c: np.ndarray
    wavelengths_um: np.ndarray
    rows: tuple[SpectrumGrid, ...]
    fixed: dict = field(default_factory=dict, compare=False)


def default_wavelength_grid(lambda_pump_um: float,
                            points: int = DEFAULT_GRID_POINTS,
                            half_width_um: float = DEFAULT_GRID_HALF_WIDTH_UM):
    """Grid of ``points`` samples spanning +/- ``half_width_um`` around the
    degenerate wavelength 2 * pump."""
    centre = 2.0 * lambda_pump_um
    return np.linspace(centre - half_width_um, centre + half_width_um, points)


def _partner(lambda_pump_um, wavelengths):
    """Partner wavelengths; invalid entries (at or below the pump) -> nan."""
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / lambda_pump_um - 1.0 / wavelengths
        li = np.where(inv > 0, 1.0 / np.where(inv > 0, inv, 1.0), np.nan)
    return li


def _branch(material, lambda_pump_um, grid, own_axis_idx, period0, length0,
            temperature_c, axes):
    """Intensity treating each grid point as the photon on one axis."""
    partner = _partner(lambda_pump_um, grid)
    own_axis = axes[own_axis_idx]
    other_axis = axes[2] if own_axis_idx == 1 else axes[1]
    valid = (np.isfinite(partner)
             & material.in_range(own_axis, grid)
             & material.in_range(other_axis, np.where(np.isfinite(partner),
                                                      partner, grid)))
    intensity = np.zeros_like(grid)
    if np.any(valid):
        g, p = grid[valid], partner[valid]
        if own_axis_idx == 1:  # grid photon on the signal axis
            dk = phase_mismatch(material, lambda_pump_um, g, p,
                                period0, temperature_c, axes)
        else:                  # grid photon on the idler axis
            dk = phase_mismatch(material, lambda_pump_um, p, g,
                                period0, temperature_c, axes)
        length_t = material.expanded_length(length0, temperature_c)
        intensity[valid] = spdc_intensity(dk, length_t)
    return intensity, valid


def spdc_spectrum(material: MaterialModel, lambda_pump_um: float,
                  poling_period_um: float, length_um: float,
                  temperature_c: float, wavelength_grid=None,
                  axes=DEFAULT_AXES) -> SpectrumGrid:
    """Per-branch sinc^2 spectrum of a crystal at one temperature."""
    if wavelength_grid is None:
        wavelength_grid = default_wavelength_grid(lambda_pump_um)
    grid = np.asarray(wavelength_grid, dtype=float)
    if grid.size == 0:
        raise SpectrumError("empty wavelength grid")
    if np.any(np.diff(grid) <= 0):
        raise SpectrumError("wavelength grid must be strictly increasing")
    if not np.all(material.in_range(axes[0], lambda_pump_um)):
        raise SpectrumError(
            f"pump {lambda_pump_um:g} um outside the {axes[0]} axis range")
    by, vy = _branch(material, lambda_pump_um, grid, 1, poling_period_um,
                     length_um, temperature_c, axes)
    bz, vz = _branch(material, lambda_pump_um, grid, 2, poling_period_um,
                     length_um, temperature_c, axes)
    return SpectrumGrid(grid, by, bz, vy, vz)


def _check_temperatures(values) -> np.ndarray:
    temps = np.asarray(values, dtype=float)
    if temps.ndim != 1 or temps.size == 0:
        raise SpectrumError("temperature axis must be a non-empty 1-d sequence")
    if temps.size > 1 and np.any(np.diff(temps) <= 0):
        raise SpectrumError("temperature axis must be strictly increasing")
    lo, hi = TEMPERATURE_LIMITS_C
    if temps[0] < lo or temps[-1] > hi:
        raise SpectrumError(f"temperatures must lie within [{lo:g}, {hi:g}] C")
    return temps


def crystal_temperature_scan(material: MaterialModel, lambda_pump_um: float,
                             poling_period_um: float, length_um: float,
                             temperatures, wavelength_grid=None,
                             axes=DEFAULT_AXES) -> TemperatureScan:
    """One spectrum per crystal temperature on a shared grid."""
    temps = _check_temperatures(temperatures)
    if wavelength_grid is None:
        wavelength_grid = default_wavelength_grid(lambda_pump_um)
    grid = np.asarray(wavelength_grid, dtype=float)
    rows = tuple(
        spdc_spectrum(material, lambda_pump_um, poling_period_um, length_um,
                      float(t), grid, axes)
        for t in temps)
    fixed = {"lambda_pump_um": lambda_pump_um,
             "poling_period_um": poling_period_um,
             "length_um": length_um}
    return TemperatureScan("crystal", temps, grid, rows, fixed)


def pump_temperature_scan(material: MaterialModel, tuning: PumpTuningModel,
                          poling_period_um: float, length_um: float,
                          crystal_temperature_c: float, laser_temperatures,
                          wavelength_grid=None,
                          axes=DEFAULT_AXES) -> TemperatureScan:
    """One spectrum per pump-laser temperature at fixed crystal temperature."""
    temps = _check_temperatures(laser_temperatures)
    if wavelength_grid is None:
        wavelength_grid = default_wavelength_grid(tuning.reference_wavelength_um)
    grid = np.asarray(wavelength_grid, dtype=float)
    rows = tuple(
        spdc_spectrum(material, float(tuning.pump_wavelength_um(t)),
                      poling_period_um, length_um, crystal_temperature_c,
                      grid, axes)
        for t in temps)
    fixed = {"poling_period_um": poling_period_um,
             "length_um": length_um,
             "crystal_temperature_c": crystal_temperature_c,
             "tuning": tuning}
    return TemperatureScan("pump-laser", temps, grid, rows, fixed)


def branch_fwhm(wavelengths_um, intensities) -> float:
    """Full width at half maximum of the dominant peak, by linear
    interpolation of the half-max crossings on the sampled curve."""
    wl = np.asarray(wavelengths_um, dtype=float)
    y = np.asarray(intensities, dtype=float)
    if wl.size < 3:
        raise SpectrumError("need at least 3 samples to estimate a width")
    peak = int(np.argmax(y))
    half = y[peak] / 2.0
    i = peak
    while i > 0 and y[i] > half:
        i -= 1
    if y[i] > half:  # ran into the grid edge
        left = wl[0]
    else:
        left = wl[i] + (wl[i + 1] - wl[i]) * (half - y[i]) / (y[i + 1] - y[i])
    j = peak
    while j < y.size - 1 and y[j] > half:
        j += 1
    if y[j] > half:
        right = wl[-1]
    else:
        right = wl[j - 1] + (wl[j] - wl[j - 1]) * (half - y[j - 1]) / (y[j] - y[j - 1])
    return float(right - left)


@dataclass(frozen=True)
class InsensitivityReport:
    """Branch peaks, separation and width per scan row, and the widest
    contiguous temperature span whose rows keep separation < FWHM."""

    temperatures_c: np.ndarray
    peak_y_um: np.ndarray
    peak_z_um: np.ndarray
    separation_um: np.ndarray
    fwhm_um: np.ndarray
    plateau_span_c: float
    plateau_range_c: tuple[float, float] | None


def insensitivity_report(scan: TemperatureScan) -> InsensitivityReport:
    """Quantify temperature insensitivity of a crystal-temperature scan.

    The per-row width is the smaller of the two branch FWHMs, which is
    the conservative reading of spectral indistinguishability.
    """
    if scan.kind != "crystal":
        raise SpectrumError("insensitivity report requires a crystal-kind scan")
    if scan.wavelengths_um.size < 3:
        raise SpectrumError("wavelength grid too coarse (need >= 3 samples)")
    n = len(scan.rows)
    peak_y = np.empty(n)
    peak_z = np.empty(n)
    fwhm = np.empty(n)
    for i, row in enumerate(scan.rows):
        peak_y[i] = row.peak_y_um()
        peak_z[i] = row.peak_z_um()
        fwhm[i] = min(branch_fwhm(row.wavelengths_um, row.branch_y),
                      branch_fwhm(row.wavelengths_um, row.branch_z))
    separation = np.abs(peak_y - peak_z)
    ok = separation < fwhm
    best_span, best_range = 0.0, None
    start = None
    temps = scan.axis_values_c
    for i in range(n + 1):
        inside = i < n and ok[i]
        if inside and start is None:
            start = i
        if not inside and start is not None:
            span = float(temps[i - 1] - temps[start])
            if best_range is None or span > best_span:
                best_span = span
                best_range = (float(temps[start]), float(temps[i - 1]))
            start = None
    return InsensitivityReport(temps, peak_y, peak_z, separation, fwhm,
                               best_span, best_range)
