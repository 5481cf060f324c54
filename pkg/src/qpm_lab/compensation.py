"""Signal-idler longitudinal phase and its birefringent compensation.

Photon pairs born at the centre of the downconversion crystal exit with
a wavelength-dependent relative phase between the orthogonally
polarized partners.  A birefringent compensator with its extraordinary
axis rotated 90 degrees relative to the source crystal accumulates the
opposite dispersion slope, flattening the phase across the emission
spectrum.

``pair_phase`` evaluates, in degrees and zero-referenced at the
degenerate wavelength,

    phi(ls) = 360 * [ (L/2) * (n_sig(ls)/ls - n_idl(li)/li)
                      + s * Lc * (n_o(ls)/ls - n_e(li)/li) ]

with ``s = -1`` under the axis-swapped orientation and li the energy
partner of ls.  The compensator is always evaluated at its reference
temperature (it sits outside the heated mount).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .materials import MaterialModel
from .qpm import DEFAULT_AXES, idler_wavelength
from .spectra import spdc_spectrum

__all__ = [
    "CompensationError",
    "CompensatorSpec",
    "PhaseProfile",
    "pair_phase",
    "phase_profile",
    "default_band",
    "optimize_compensator_length",
]

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
MAX_COMPENSATOR_UM = 20000.0
COARSE_STEP_UM = 10.0
BAND_SAMPLES = 801
BAND_THRESHOLD = 0.1


class CompensationError(ValueError):
    """Invalid compensation request."""


@dataclass(frozen=True)
class CompensatorSpec:
    """A birefringent compensation crystal in the downconverted beam.

    ``axis_swapped`` mirrors the physical orientation with the
    extraordinary axis perpendicular to the source crystal's; it flips
    the sign of the accumulated phase term.
    """

    material: MaterialModel
    length_um: float
    axis_swapped: bool = True
    axes: tuple[str, str] = ("o", "e")

    def __post_init__(self):
        if self.length_um < 0:
            raise CompensationError("compensator length must be >= 0")
        self.material.require_axes(self.axes)


@dataclass(frozen=True)
class PhaseProfile:
    """Relative pair phase (degrees) versus signal wavelength,
    zero-referenced at ``reference_um`` (None for externally supplied
    profiles with no stated reference)."""

    wavelengths_um: np.ndarray
    phase_deg: np.ndarray
    reference_um: float | None = None

    def __post_init__(self):
        if np.any(np.diff(self.wavelengths_um) <= 0):
            raise CompensationError("phase profile samples must be increasing")


def _phase_cycles(source: MaterialModel, wavelengths, lambda_pump_um,
                  temperature_c, half_length_um, compensator, axes):
    ls = np.asarray(wavelengths, dtype=float)
    li = np.asarray(idler_wavelength(lambda_pump_um, ls))
    _, signal_axis, idler_axis = axes
    cycles = half_length_um * (
        np.asarray(source.refractive_index(signal_axis, ls, temperature_c)) / ls
        - np.asarray(source.refractive_index(idler_axis, li, temperature_c)) / li)
    if compensator is not None and compensator.length_um > 0:
        comp = compensator.material
        ax_s, ax_i = compensator.axes
        sign = -1.0 if compensator.axis_swapped else 1.0
        cycles = cycles + sign * compensator.length_um * (
            np.asarray(comp.refractive_index(ax_s, ls)) / ls
            - np.asarray(comp.refractive_index(ax_i, li)) / li)
    return cycles


def pair_phase(source: MaterialModel, lambda_signal_um, lambda_pump_um,
               temperature_c, length_um, compensator: CompensatorSpec | None = None,
               axes=DEFAULT_AXES):
    """Relative signal-idler phase in degrees, zero at 2 * pump.

    ``length_um`` is the full source-crystal length at the expansion
    reference; pairs are taken to originate at the crystal centre, so
    half the thermally expanded length accumulates phase.
    """
    half = source.expanded_length(length_um, temperature_c) / 2.0
    reference = 2.0 * lambda_pump_um
    cycles = _phase_cycles(source, lambda_signal_um, lambda_pump_um,
                           temperature_c, half, compensator, axes)
    ref_cycles = _phase_cycles(source, reference, lambda_pump_um,
                               temperature_c, half, compensator, axes)
    phase = 360.0 * (cycles - ref_cycles)
    if np.ndim(lambda_signal_um) == 0:
        return float(phase)
    return phase


def phase_profile(source: MaterialModel, lambda_pump_um, temperature_c,
                  length_um, band_um, samples: int = BAND_SAMPLES,
                  compensator: CompensatorSpec | None = None,
                  axes=DEFAULT_AXES) -> PhaseProfile:
    """Sampled pair phase across a wavelength band containing degeneracy."""
    lo, hi = band_um
    reference = 2.0 * lambda_pump_um
    if not lo < hi:
        raise CompensationError("band must be a non-degenerate interval")
    if not lo <= reference <= hi:
        raise CompensationError("band must contain the degenerate wavelength")
    wl = np.linspace(lo, hi, samples)
    phase = pair_phase(source, wl, lambda_pump_um, temperature_c, length_um,
                       compensator, axes)
    return PhaseProfile(wl, phase, reference)


def default_band(source: MaterialModel, lambda_pump_um, poling_period_um,
                 length_um, temperature_c, threshold: float = BAND_THRESHOLD,
                 axes=DEFAULT_AXES) -> tuple[float, float]:
    """Band where the simulated spectrum exceeds ``threshold`` of its peak.

    Returns the contiguous above-threshold interval around the spectrum
    maximum, intersected with the compensator-relevant material windows
    by virtue of the spectrum's own validity flags.
    """
    spectrum = spdc_spectrum(source, lambda_pump_um, poling_period_um,
                             length_um, temperature_c, axes=axes)
    total = spectrum.total
    above = total >= threshold * float(total.max())
    peak = int(np.argmax(total))
    i = peak
    while i > 0 and above[i - 1]:
        i -= 1
    j = peak
    while j < total.size - 1 and above[j + 1]:
        j += 1
    return (float(spectrum.wavelengths_um[i]), float(spectrum.wavelengths_um[j]))


def optimize_compensator_length(source: MaterialModel,
                                compensator_material: MaterialModel,
                                lambda_pump_um, temperature_c, length_um,
                                band_um, samples: int = BAND_SAMPLES,
                                max_length_um: float = MAX_COMPENSATOR_UM,
                                axes=DEFAULT_AXES,
                                axis_swapped: bool = True):
    """Compensator length minimizing the worst phase over the band.

    Returns ``(length_um, residual_deg)``.  The band maximum of the
    phase magnitude is a maximum of affine functions of the length and
    hence convex; a coarse grid scan seeds a golden-section refinement.
    """
    lo, hi = band_um
    if not lo < hi:
        raise CompensationError("band must be a non-degenerate interval")
    reference = 2.0 * lambda_pump_um
    if not lo <= reference <= hi:
        raise CompensationError("band must contain the degenerate wavelength")
    half = source.expanded_length(length_um, temperature_c) / 2.0
    wl = np.linspace(lo, hi, samples)
    li = np.asarray(idler_wavelength(lambda_pump_um, wl))
    li_ref = idler_wavelength(lambda_pump_um, reference)
    _, signal_axis, idler_axis = axes
    ax_s, ax_e = "o", "e"
    compensator_material.require_axes((ax_s, ax_e))
    sign = -1.0 if axis_swapped else 1.0

    source_cycles = half * (
        np.asarray(source.refractive_index(signal_axis, wl, temperature_c)) / wl
        - np.asarray(source.refractive_index(idler_axis, li, temperature_c)) / li)
    source_ref = half * (
        source.refractive_index(signal_axis, reference, temperature_c) / reference
        - source.refractive_index(idler_axis, li_ref, temperature_c) / li_ref)
    comp_cycles = sign * (
        np.asarray(compensator_material.refractive_index(ax_s, wl)) / wl
        - np.asarray(compensator_material.refractive_index(ax_e, li)) / li)
    comp_ref = sign * (
        compensator_material.refractive_index(ax_s, reference) / reference
        - compensator_material.refractive_index(ax_e, li_ref) / li_ref)

    base = 360.0 * (source_cycles - source_ref)
    slope = 360.0 * (comp_cycles - comp_ref)

    def residual(lc: float) -> float:
        return float(np.max(np.abs(base + lc * slope)))

    coarse = np.arange(0.0, max_length_um + COARSE_STEP_UM, COARSE_STEP_UM)
    coarse_res = np.max(np.abs(base[None, :] + coarse[:, None] * slope[None, :]),
                        axis=1)
    k = int(np.argmin(coarse_res))
    a = coarse[max(k - 1, 0)]
    b = coarse[min(k + 1, coarse.size - 1)]
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = residual(c), residual(d)
    while b - a > 1e-6:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = residual(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = residual(d)
    best = 0.5 * (a + b)
    return best, residual(best)
