"""Quasi-phasematching relations for collinear Type II SPDC.

The first-order QPM residual used throughout is

    delta_k = |k_pump - k_signal - k_idler| - 2*pi / Lambda(T)

with k = 2 pi n / lambda.  The grating vector enters with the sign that
can cancel the material mismatch (the inversion grating compensates
either sign, and the sinc^2 intensity is even in delta_k); in the
default Type II KTP geometry the unpoled mismatch changes sign near
1.08 um, so both situations occur in practice.  ``unpoled_mismatch``
exposes the signed quantity.

Axes are passed as ``(pump, signal, idler)`` labels; the default
``("Y", "Y", "Z")`` is the x-cut Type II KTP assignment (signal on the
pump's axis, idler orthogonal).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .materials import MaterialModel

__all__ = [
    "DEFAULT_AXES",
    "PhasematchError",
    "QpmProcess",
    "idler_wavelength",
    "unpoled_mismatch",
    "phase_mismatch",
    "delta_k",
    "spdc_intensity",
    "solve_poling_period",
    "solve_phasematched_signal",
    "degenerate_pump_wavelength",
]

DEFAULT_AXES = ("Y", "Y", "Z")

PERIOD_BRACKET_UM = (1.0, 500.0)
PERIOD_XTOL_UM = 1e-10
WAVELENGTH_XTOL_UM = 1e-12
ROOT_RESIDUAL = 1e-9
DEGENERACY_MERGE_UM = 1e-4
SIGNAL_WINDOW = (1.5, 4.0)  # search window for signal roots, in pump multiples


class PhasematchError(ValueError):
    """Raised when a phasematching solve has no admissible solution."""


def idler_wavelength(lambda_pump_um, lambda_signal_um):
    """Partner wavelength from energy conservation, 1/li = 1/lp - 1/ls."""
    lp = np.asarray(lambda_pump_um, dtype=float)
    ls = np.asarray(lambda_signal_um, dtype=float)
    if np.any(ls <= lp):
        raise PhasematchError(
            "signal wavelength must exceed the pump wavelength")
    li = 1.0 / (1.0 / lp - 1.0 / ls)
    if li.ndim == 0:
        return float(li)
    return li


def unpoled_mismatch(material: MaterialModel, lambda_pump_um, lambda_signal_um,
                     lambda_idler_um, temperature_c, axes=DEFAULT_AXES):
    """Signed material mismatch k_pump - k_signal - k_idler in rad/um."""
    pump_axis, signal_axis, idler_axis = axes
    kp = material.wavevector(pump_axis, lambda_pump_um, temperature_c)
    ks = material.wavevector(signal_axis, lambda_signal_um, temperature_c)
    ki = material.wavevector(idler_axis, lambda_idler_um, temperature_c)
    return kp - ks - ki


def phase_mismatch(material: MaterialModel, lambda_pump_um, lambda_signal_um,
                   lambda_idler_um, poling_period_um, temperature_c,
                   axes=DEFAULT_AXES):
    """First-order QPM residual; ``poling_period_um`` is the period at the
    expansion reference temperature and is thermally expanded here."""
    if np.any(np.asarray(poling_period_um) <= 0):
        raise PhasematchError("poling period must be positive")
    c = unpoled_mismatch(material, lambda_pump_um, lambda_signal_um,
                         lambda_idler_um, temperature_c, axes)
    period_at_t = np.asarray(poling_period_um) * material.expansion_factor(temperature_c)
    return np.abs(c) - 2.0 * np.pi / period_at_t


@dataclass(frozen=True)
class QpmProcess:
    """A fully specified collinear Type II process.

    ``poling_period_um`` and ``length_um`` are stated at the expansion
    reference temperature; evaluation expands them to ``temperature_c``.
    """

    material: MaterialModel
    lambda_pump_um: float
    lambda_signal_um: float
    lambda_idler_um: float
    poling_period_um: float
    length_um: float
    temperature_c: float
    axes: tuple[str, str, str] = field(default=DEFAULT_AXES)

    ENERGY_TOL = 1e-12  # 1/um

    def __post_init__(self):
        self.material.require_axes(self.axes)
        if self.poling_period_um <= 0 or self.length_um <= 0:
            raise ValueError("poling period and length must be positive")
        if not self.lambda_pump_um < self.lambda_signal_um <= self.lambda_idler_um:
            raise ValueError(
                "wavelength convention violated: need pump < signal <= idler")
        gap = abs(1.0 / self.lambda_pump_um - 1.0 / self.lambda_signal_um
                  - 1.0 / self.lambda_idler_um)
        if gap >= self.ENERGY_TOL:
            raise ValueError(
                f"triple violates energy conservation by {gap:.3e} 1/um")

    @classmethod
    def from_signal(cls, material, lambda_pump_um, lambda_signal_um,
                    poling_period_um, length_um, temperature_c,
                    axes=DEFAULT_AXES):
        li = idler_wavelength(lambda_pump_um, lambda_signal_um)
        if li < lambda_signal_um:
            raise ValueError("signal must be the shorter wavelength of the pair")
        return cls(material, lambda_pump_um, lambda_signal_um, li,
                   poling_period_um, length_um, temperature_c, axes)

    @classmethod
    def degenerate(cls, material, lambda_degenerate_um, poling_period_um,
                   length_um, temperature_c, axes=DEFAULT_AXES):
        return cls(material, lambda_degenerate_um / 2.0, lambda_degenerate_um,
                   lambda_degenerate_um, poling_period_um, length_um,
                   temperature_c, axes)

    def delta_k(self) -> float:
        return float(phase_mismatch(
            self.material, self.lambda_pump_um, self.lambda_signal_um,
            self.lambda_idler_um, self.poling_period_um, self.temperature_c,
            self.axes))

    def expanded_length_um(self) -> float:
        return self.material.expanded_length(self.length_um, self.temperature_c)

    def intensity(self) -> float:
        return float(spdc_intensity(self.delta_k(), self.expanded_length_um()))


def delta_k(process: QpmProcess) -> float:
    """Phase mismatch of a process in rad/um."""
    return process.delta_k()


def spdc_intensity(delta_k_rad_per_um, length_um):
    """sinc^2(delta_k * L / 2) with sinc(0) = 1; dimensionless in [0, 1]."""
    if np.any(np.asarray(length_um) <= 0):
        raise ValueError("crystal length must be positive")
    x = np.asarray(delta_k_rad_per_um) * np.asarray(length_um) / 2.0
    out = np.sinc(x / np.pi) ** 2
    if out.ndim == 0:
        return float(out)
    return out


def _bisect(f, lo, f_lo, hi, f_hi, xtol):
    """Deterministic bisection on a bracketing interval."""
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise PhasematchError("bisection endpoints do not bracket a root")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # interval at floating-point resolution
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def solve_poling_period(material: MaterialModel, lambda_degenerate_um,
                        temperature_c, axes=DEFAULT_AXES,
                        bracket=PERIOD_BRACKET_UM) -> float:
    """Poling period (at expansion reference) for degenerate emission.

    Solves |delta_k| = 0 for the triple (lambda/2, lambda, lambda) at the
    given crystal temperature.  The residual is monotone in the period,
    so a bracketed bisection refined to ``PERIOD_XTOL_UM`` is exact for
    practical purposes.
    """
    lp = lambda_degenerate_um / 2.0
    ls = li = float(lambda_degenerate_um)

    def g(period0):
        return float(phase_mismatch(material, lp, ls, li, period0,
                                    temperature_c, axes))

    lo, hi = bracket
    g_lo, g_hi = g(lo), g(hi)
    if g_lo * g_hi > 0:
        raise PhasematchError(
            f"no poling period in [{lo:g}, {hi:g}] um phasematches "
            f"{lambda_degenerate_um:g} um at {temperature_c:g} C")
    period = _bisect(g, lo, g_lo, hi, g_hi, PERIOD_XTOL_UM)
    if abs(g(period)) >= ROOT_RESIDUAL:
        raise PhasematchError("period solver failed to reach residual tolerance")
    return period


def _signal_domain(material: MaterialModel, lambda_pump_um, axes):
    """Signal-wavelength interval where signal and partner are evaluable."""
    _, signal_axis, idler_axis = axes
    sig_lo, sig_hi = material.axis(signal_axis).sellmeier.range_um
    idl_lo, idl_hi = material.axis(idler_axis).sellmeier.range_um
    lo = max(SIGNAL_WINDOW[0] * lambda_pump_um, sig_lo)
    hi = min(SIGNAL_WINDOW[1] * lambda_pump_um, sig_hi)
    # the partner decreases as the signal grows, from +inf down to the pump;
    # the derived bounds get a relative nudge so rounding cannot push the
    # partner back outside the fitted window
    lp = lambda_pump_um
    if idl_hi > lp:  # partner <= idl_hi requires a large-enough signal
        lo = max(lo, 1.0 / (1.0 / lp - 1.0 / idl_hi) * (1.0 + 1e-12))
    if idl_lo > lp:  # partner >= idl_lo caps the signal
        hi = min(hi, 1.0 / (1.0 / lp - 1.0 / idl_lo) * (1.0 - 1e-12))
    return lo, hi


def solve_phasematched_signal(material: MaterialModel, lambda_pump_um,
                              poling_period_um, temperature_c,
                              axes=DEFAULT_AXES, samples: int = 20001):
    """All phasematched (signal, idler) pairs for a given crystal.

    The first tuple element is the photon on the signal axis; near
    degeneracy it can be either the shorter or the longer of the pair.
    Roots are located by a sign scan over the admissible signal window
    and refined by bisection; roots closer than ``DEGENERACY_MERGE_UM``
    are merged and reported once.
    """
    lo, hi = _signal_domain(material, lambda_pump_um, axes)
    if not lo < hi:
        raise PhasematchError("empty signal search window for this material")
    grid = np.linspace(lo, hi, samples)
    partners = idler_wavelength(lambda_pump_um, grid)
    vals = phase_mismatch(material, lambda_pump_um, grid, partners,
                          poling_period_um, temperature_c, axes)

    def f(ls):
        return float(phase_mismatch(material, lambda_pump_um, ls,
                                    idler_wavelength(lambda_pump_um, ls),
                                    poling_period_um, temperature_c, axes))

    roots = []
    exact = np.nonzero(vals == 0.0)[0]
    roots.extend(float(grid[i]) for i in exact)
    sign = np.sign(vals)
    brackets = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in brackets:
        roots.append(_bisect(f, float(grid[i]), float(vals[i]),
                             float(grid[i + 1]), float(vals[i + 1]),
                             WAVELENGTH_XTOL_UM))
    roots.sort()
    merged: list[float] = []
    for r in roots:
        if merged and r - merged[-1] < DEGENERACY_MERGE_UM:
            merged[-1] = 0.5 * (merged[-1] + r)
        else:
            merged.append(r)
    if not merged:
        raise PhasematchError(
            f"no phasematched signal in [{lo:.4f}, {hi:.4f}] um for pump "
            f"{lambda_pump_um:g} um, period {poling_period_um:g} um at "
            f"{temperature_c:g} C")
    for r in merged:
        if abs(f(r)) >= ROOT_RESIDUAL:
            raise PhasematchError("signal solver failed to reach residual tolerance")
    return [(r, idler_wavelength(lambda_pump_um, r)) for r in merged]


def degenerate_pump_wavelength(material: MaterialModel, poling_period_um,
                               temperature_c, axes=DEFAULT_AXES,
                               bracket=(0.55, 0.80)) -> float:
    """Pump wavelength whose degenerate triple is exactly phasematched.

    Inverse of ``solve_poling_period`` in the pump variable, for a fixed
    crystal; used to locate the spectral crossing of the two branches.
    """
    def g(lp):
        return float(phase_mismatch(material, lp, 2.0 * lp, 2.0 * lp,
                                    poling_period_um, temperature_c, axes))

    lo, hi = bracket
    g_lo, g_hi = g(lo), g(hi)
    if g_lo * g_hi > 0:
        raise PhasematchError(
            f"no degenerate pump in [{lo:g}, {hi:g}] um for period "
            f"{poling_period_um:g} um at {temperature_c:g} C")
    return _bisect(g, lo, g_lo, hi, g_hi, WAVELENGTH_XTOL_UM)
