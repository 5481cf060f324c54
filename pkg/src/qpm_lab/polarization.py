"""Polarization-correlation curves, visibilities and Bell-state fidelity.

Models the post-selected two-photon state produced by splitting a
collinear Type II pair at a beamsplitter: ideal correlations give
coincidence fringes ~ sin^2(theta + alpha) between the two analyzer
angles, and imperfections are summarized by one fringe visibility per
analysis basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compensation import PhaseProfile
from .spectra import SpectrumGrid

__all__ = [
    "PolarizationError",
    "TwoPhotonState",
    "VisibilitySet",
    "coincidence_curve",
    "visibility_from_extremes",
    "visibility_from_phase",
    "fidelity_from_visibilities",
]


class PolarizationError(ValueError):
    """Invalid polarization-model request."""


def _check_fraction(name: str, value: float) -> float:
    v = float(value)
    if not 0.0 <= v <= 1.0:
        raise PolarizationError(f"{name} must lie in [0, 1], got {value!r}")
    return v


@dataclass(frozen=True)
class TwoPhotonState:
    """Fringe visibilities of the produced state plus a rate scale."""

    visibility_production: float
    visibility_diag_plus: float
    visibility_diag_minus: float
    mean_rate: float = 1.0

    def __post_init__(self):
        _check_fraction("visibility_production", self.visibility_production)
        _check_fraction("visibility_diag_plus", self.visibility_diag_plus)
        _check_fraction("visibility_diag_minus", self.visibility_diag_minus)
        if self.mean_rate < 0:
            raise PolarizationError("mean_rate must be >= 0")

    def basis_visibility(self, idler_angle_deg: float) -> float:
        """Visibility applicable to the idler analyzer setting.

        The production (H/V) and the two diagonal bases carry their own
        visibilities; intermediate angles use the nearest basis family.
        """
        folded = float(idler_angle_deg) % 180.0
        d_prod = min(abs(folded - a) for a in (0.0, 90.0, 180.0))
        d_plus = abs(folded - 45.0)
        d_minus = abs(folded - 135.0)
        best = min(d_prod, d_plus, d_minus)
        if best == d_prod:
            return self.visibility_production
        if best == d_plus:
            return self.visibility_diag_plus
        return self.visibility_diag_minus


@dataclass(frozen=True)
class VisibilitySet:
    """Measured visibilities in the three analysis bases plus fidelity."""

    v_hv: float
    v_plus45: float
    v_minus45: float
    fidelity: float

    @classmethod
    def from_visibilities(cls, v_hv, v_plus45, v_minus45) -> "VisibilitySet":
        return cls(v_hv, v_plus45, v_minus45,
                   fidelity_from_visibilities(v_hv, v_plus45, v_minus45))


def coincidence_curve(state: TwoPhotonState, idler_angle_deg: float,
                      signal_angles_deg):
    """Normalized coincidence rate versus signal analyzer angle.

    rate(theta) = mean_rate/2 * (1 - V cos(2(theta + alpha))) with alpha
    the idler angle; for V = 1 this is mean_rate * sin^2(theta + alpha).
    """
    theta = np.asarray(signal_angles_deg, dtype=float)
    v = state.basis_visibility(idler_angle_deg)
    arg = np.deg2rad(2.0 * (theta + float(idler_angle_deg)))
    rate = 0.5 * state.mean_rate * (1.0 - v * np.cos(arg))
    if rate.ndim == 0:
        return float(rate)
    return rate


def visibility_from_extremes(rate_max: float, rate_min: float,
                             accidental_max: float = 0.0,
                             accidental_min: float = 0.0) -> float:
    """Fringe visibility from extreme rates after accidental subtraction."""
    if not rate_max >= rate_min >= 0:
        raise PolarizationError("need rate_max >= rate_min >= 0")
    if not 0 <= accidental_max <= rate_max or not 0 <= accidental_min <= rate_min:
        raise PolarizationError("accidentals must lie in [0, corresponding rate]")
    hi = rate_max - accidental_max
    lo = rate_min - accidental_min
    if hi + lo == 0:
        raise PolarizationError("zero total rate after accidental subtraction")
    return (hi - lo) / (hi + lo)


def visibility_from_phase(spectrum, phase: PhaseProfile) -> float:
    """Diagonal-basis visibility from residual spectral phase.

    V = |sum S(l) e^{i phi(l)}| / sum S(l) over the spectrum grid, with
    the phase resampled onto it by linear interpolation and the
    total-branch intensities as weights.  ``spectrum`` is either a
    ``SpectrumGrid`` or a ``(wavelengths_um, weights)`` pair.
    """
    if isinstance(spectrum, SpectrumGrid):
        wavelengths = spectrum.wavelengths_um
        weights = spectrum.total
    else:
        wavelengths, weights = (np.asarray(a, dtype=float) for a in spectrum)
    total = float(np.sum(weights))
    if total <= 0:
        raise PolarizationError("spectrum carries no weight")
    phi = np.interp(wavelengths, phase.wavelengths_um, phase.phase_deg)
    z = np.sum(weights * np.exp(1j * np.deg2rad(phi)))
    return float(abs(z)) / total


def fidelity_from_visibilities(v_hv: float, v_plus45: float,
                               v_minus45: float) -> float:
    """Bell-state fidelity from the three fringe visibilities,
    F = (1 + V_HV + V_+45 + V_-45) / 4."""
    v1 = _check_fraction("v_hv", v_hv)
    v2 = _check_fraction("v_plus45", v_plus45)
    v3 = _check_fraction("v_minus45", v_minus45)
    return (1.0 + v1 + v2 + v3) / 4.0
