"""Temperature-dependent refractive-index models for birefringent crystals.

Crystals are described by small text files (see ``data/``): one Sellmeier
set per axis, optional per-axis thermo-optic corrections and an optional
thermal-expansion model.  Loaded models are immutable and all evaluation
is pure, so they are safe to share across threads.

Wavelengths are in micrometres, temperatures in degrees Celsius
throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "MaterialError",
    "MaterialParseError",
    "MaterialValidationError",
    "WavelengthRangeError",
    "UnknownAxisError",
    "SellmeierSet",
    "ThermoOpticSet",
    "ExpansionSet",
    "CrystalAxis",
    "MaterialModel",
    "load_material",
    "load_material_file",
    "bundled_material",
    "bundled_names",
]

DEFAULT_T_REF_C = 25.0
DEFAULT_TEMP_RANGE_C = (-20.0, 200.0)

# Each form maps to (number of coefficients, evaluator of n^2).
_FORMS = {
    # n^2 = a + b1/(L^2 - c1) + b2/(L^2 - c2)
    "two_pole": (5, lambda l2, c: c[0] + c[1] / (l2 - c[2]) + c[3] / (l2 - c[4])),
    # n^2 = a + b/(L^2 - c) - d * L^2
    "one_pole_ir": (4, lambda l2, c: c[0] + c[1] / (l2 - c[2]) - c[3] * l2),
}


def _match_input(value, like):
    """Return ``value`` as a plain float when ``like`` was scalar input."""
    arr = np.asarray(value)
    if arr.ndim == 0 and not isinstance(like, np.ndarray):
        return float(arr)
    return arr


class MaterialError(ValueError):
    """Base class for material-file and evaluation errors."""


class MaterialParseError(MaterialError):
    """Malformed material file; carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MaterialValidationError(MaterialError):
    """A structurally valid file that violates a model invariant."""


class WavelengthRangeError(MaterialError):
    """Wavelength outside the fitted Sellmeier window; never extrapolated."""


class UnknownAxisError(MaterialError):
    """Axis label not present in the material."""


@dataclass(frozen=True)
class SellmeierSet:
    """Room-temperature dispersion n(lambda) over a fitted window."""

    form: str
    coefficients: tuple[float, ...]
    range_um: tuple[float, float]

    def index(self, wavelength_um):
        lam = np.asarray(wavelength_um, dtype=float)
        n2 = _FORMS[self.form][1](lam * lam, self.coefficients)
        return np.sqrt(n2)

    def contains(self, wavelength_um):
        lam = np.asarray(wavelength_um, dtype=float)
        lo, hi = self.range_um
        return (lam >= lo) & (lam <= hi)


@dataclass(frozen=True)
class ThermoOpticSet:
    """Index correction n1(L)*(T-Tref) + n2(L)*(T-Tref)^2.

    ``first_order`` and ``second_order`` are polynomial coefficients in
    inverse wavelength: n_k(L) = sum_i c_i / L^i.
    """

    t_ref_c: float
    first_order: tuple[float, ...]
    second_order: tuple[float, ...]

    @staticmethod
    def _poly_inv(coeffs, wavelength_um):
        x = 1.0 / np.asarray(wavelength_um, dtype=float)
        out = np.zeros_like(x)
        for c in reversed(coeffs):
            out = out * x + c
        return out

    def delta(self, wavelength_um, temperature_c):
        dt = temperature_c - self.t_ref_c
        return (self._poly_inv(self.first_order, wavelength_um) * dt
                + self._poly_inv(self.second_order, wavelength_um) * dt * dt)

    def delta_derivative(self, wavelength_um, temperature_c):
        """Analytic d(delta)/dT, used by the finite-difference checks."""
        dt = temperature_c - self.t_ref_c
        return (self._poly_inv(self.first_order, wavelength_um)
                + 2.0 * dt * self._poly_inv(self.second_order, wavelength_um))


@dataclass(frozen=True)
class ExpansionSet:
    """Linear+quadratic thermal expansion, L(T) = L0 * factor(T)."""

    t_ref_c: float
    alpha: float
    beta: float

    def factor(self, temperature_c) -> float:
        dt = temperature_c - self.t_ref_c
        return 1.0 + self.alpha * dt + self.beta * dt * dt


@dataclass(frozen=True)
class CrystalAxis:
    sellmeier: SellmeierSet
    thermo: ThermoOpticSet | None = None


@dataclass(frozen=True)
class MaterialModel:
    """One crystal: per-axis dispersion plus optional thermal models."""

    name: str
    axes: dict[str, CrystalAxis]
    expansion: ExpansionSet | None = None
    temp_range_c: tuple[float, float] = DEFAULT_TEMP_RANGE_C
    source: str = field(default="<memory>", compare=False)

    def axis(self, label: str) -> CrystalAxis:
        try:
            return self.axes[label]
        except KeyError:
            raise UnknownAxisError(
                f"{self.name}: unknown axis {label!r} (have {sorted(self.axes)})"
            ) from None

    def require_axes(self, labels) -> None:
        missing = [a for a in labels if a not in self.axes]
        if missing:
            raise MaterialValidationError(
                f"{self.name}: missing axis {', '.join(missing)} "
                f"(have {sorted(self.axes)})"
            )

    def in_range(self, axis: str, wavelength_um):
        return self.axis(axis).sellmeier.contains(wavelength_um)

    def _check_range(self, axis: str, wavelength_um) -> None:
        ax = self.axis(axis)
        ok = ax.sellmeier.contains(wavelength_um)
        if not np.all(ok):
            lo, hi = ax.sellmeier.range_um
            bad = np.atleast_1d(np.asarray(wavelength_um, dtype=float))[
                ~np.atleast_1d(ok)][0]
            raise WavelengthRangeError(
                f"{self.name}.{axis}: wavelength {bad:.6g} um outside "
                f"fitted range [{lo:g}, {hi:g}] um"
            )

    def refractive_index(self, axis: str, wavelength_um, temperature_c=None):
        """n(lambda, T) = n_sellmeier(lambda) + thermo-optic correction."""
        ax = self.axis(axis)
        self._check_range(axis, wavelength_um)
        if temperature_c is None:
            temperature_c = self.t_ref_c(axis)
        n = ax.sellmeier.index(wavelength_um)
        if ax.thermo is not None:
            n = n + ax.thermo.delta(wavelength_um, temperature_c)
        return _match_input(n, wavelength_um)

    def wavevector(self, axis: str, wavelength_um, temperature_c=None):
        """k = 2 pi n(lambda, T) / lambda in rad/um."""
        n = self.refractive_index(axis, wavelength_um, temperature_c)
        k = 2.0 * np.pi * np.asarray(n) / np.asarray(wavelength_um, dtype=float)
        return _match_input(k, wavelength_um)

    def t_ref_c(self, axis: str) -> float:
        ax = self.axis(axis)
        return ax.thermo.t_ref_c if ax.thermo is not None else DEFAULT_T_REF_C

    def expansion_factor(self, temperature_c) -> float:
        if self.expansion is None:
            return 1.0
        return self.expansion.factor(temperature_c)

    def expanded_length(self, length_um: float, temperature_c) -> float:
        """Thermally expanded length; identity for materials without expansion."""
        if length_um <= 0:
            raise MaterialValidationError(f"length must be positive, got {length_um}")
        return length_um * self.expansion_factor(temperature_c)

    def common_range_um(self) -> tuple[float, float]:
        lo = max(ax.sellmeier.range_um[0] for ax in self.axes.values())
        hi = min(ax.sellmeier.range_um[1] for ax in self.axes.values())
        return lo, hi


# --------------------------------------------------------------------------
# file parsing
# --------------------------------------------------------------------------

def _parse_value(raw: str, line: int):
    raw = raw.strip()
    if not raw:
        raise MaterialParseError(line, "empty value")
    if raw.startswith('"'):
        if not (raw.endswith('"') and len(raw) >= 2):
            raise MaterialParseError(line, f"unterminated string {raw!r}")
        return raw[1:-1]
    parts = [p.strip() for p in raw.split(",")]
    try:
        numbers = [float(p) for p in parts]
    except ValueError:
        raise MaterialParseError(line, f"expected number(s), got {raw!r}") from None
    return numbers[0] if len(numbers) == 1 else tuple(numbers)


def _parse_document(text: str) -> dict[str, dict[str, object]]:
    sections: dict[str, dict[str, object]] = {}
    current: dict[str, object] | None = None
    current_name = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise MaterialParseError(lineno, f"malformed section header {line!r}")
            current_name = line[1:-1].strip()
            if current_name in sections:
                raise MaterialParseError(lineno, f"duplicate section [{current_name}]")
            current = {}
            sections[current_name] = current
            continue
        if "=" not in line:
            raise MaterialParseError(lineno, f"expected 'key = value', got {line!r}")
        if current is None:
            raise MaterialParseError(lineno, "key/value pair outside any section")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise MaterialParseError(lineno, "missing key before '='")
        if key in current:
            raise MaterialParseError(
                lineno, f"duplicate key {key!r} in section [{current_name}]")
        current[key] = _parse_value(value, lineno)
    return sections


def _as_tuple(value) -> tuple[float, ...]:
    if isinstance(value, tuple):
        return value
    if isinstance(value, float):
        return (value,)
    raise MaterialValidationError(f"expected numbers, got {value!r}")


def _build_axis(label: str, section: dict[str, object]) -> CrystalAxis:
    for key in ("form", "coefficients", "range_um"):
        if key not in section:
            raise MaterialValidationError(f"axis {label}: missing required key {key!r}")
    form = section["form"]
    if not isinstance(form, str) or form not in _FORMS:
        raise MaterialValidationError(
            f"axis {label}: unknown form {form!r} (supported: {sorted(_FORMS)})")
    coeffs = _as_tuple(section["coefficients"])
    want = _FORMS[form][0]
    if len(coeffs) != want:
        raise MaterialValidationError(
            f"axis {label}: form {form!r} takes {want} coefficients, got {len(coeffs)}")
    rng = _as_tuple(section["range_um"])
    if len(rng) != 2 or not rng[0] < rng[1] or rng[0] <= 0:
        raise MaterialValidationError(
            f"axis {label}: range_um must be two increasing positive numbers")
    sellmeier = SellmeierSet(form, coeffs, (rng[0], rng[1]))

    thermo = None
    if "thermo_n1" in section or "thermo_n2" in section:
        n1 = _as_tuple(section.get("thermo_n1", (0.0,)))
        n2 = _as_tuple(section.get("thermo_n2", (0.0,)))
        t_ref = float(section.get("thermo_t_ref_c", DEFAULT_T_REF_C))
        thermo = ThermoOpticSet(t_ref, n1, n2)

    known = {"form", "coefficients", "range_um",
             "thermo_n1", "thermo_n2", "thermo_t_ref_c"}
    extra = set(section) - known
    if extra:
        raise MaterialValidationError(f"axis {label}: unknown key {sorted(extra)}")
    return CrystalAxis(sellmeier, thermo)


def _validate(model: MaterialModel) -> None:
    t_lo, t_hi = model.temp_range_c
    for label, ax in model.axes.items():
        lo, hi = ax.sellmeier.range_um
        lam = np.linspace(lo, hi, 257)
        n = ax.sellmeier.index(lam)
        if not np.all(np.isfinite(n)):
            raise MaterialValidationError(
                f"{model.name}.{label}: n(lambda) not finite inside range_um")
        if np.any(n <= 1.0) or np.any(n >= 3.0):
            raise MaterialValidationError(
                f"{model.name}.{label}: n(lambda) outside (1, 3) inside range_um")
        if ax.thermo is not None:
            for t in (t_lo, t_hi):
                if np.max(np.abs(ax.thermo.delta(lam, t))) >= 0.01:
                    raise MaterialValidationError(
                        f"{model.name}.{label}: |delta n| >= 0.01 at {t} C "
                        "(thermo-optic sanity bound)")
    lo, hi = model.common_range_um()
    if not lo < hi:
        raise MaterialValidationError(
            f"{model.name}: axis ranges do not overlap")
    if model.expansion is not None:
        for t in np.linspace(t_lo, t_hi, 23):
            if model.expansion.factor(t) <= 0.0:
                raise MaterialValidationError(
                    f"{model.name}: expansion factor non-positive at {t:.1f} C")


def load_material(text: str, require_axes=(), source: str = "<memory>") -> MaterialModel:
    """Parse and validate a material document.

    ``require_axes`` lists axis labels the caller is going to use (for a
    Type II process typically ``("Y", "Z")``); missing labels raise a
    validation error at load time rather than at first evaluation.
    """
    sections = _parse_document(text)
    if "material" not in sections:
        raise MaterialValidationError("missing [material] section")
    mat = dict(sections.pop("material"))
    name = mat.pop("name", None)
    if not isinstance(name, str) or not name:
        raise MaterialValidationError("[material] must carry a quoted name")
    temp_range = DEFAULT_TEMP_RANGE_C
    if "temp_range_c" in mat:
        rng = _as_tuple(mat.pop("temp_range_c"))
        if len(rng) != 2 or not rng[0] < rng[1]:
            raise MaterialValidationError("temp_range_c must be two increasing numbers")
        temp_range = (rng[0], rng[1])
    if mat:
        raise MaterialValidationError(f"[material]: unknown key {sorted(mat)}")

    expansion = None
    if "expansion" in sections:
        exp = dict(sections.pop("expansion"))
        expansion = ExpansionSet(
            t_ref_c=float(exp.pop("t_ref_c", DEFAULT_T_REF_C)),
            alpha=float(exp.pop("alpha", 0.0)),
            beta=float(exp.pop("beta", 0.0)),
        )
        if exp:
            raise MaterialValidationError(f"[expansion]: unknown key {sorted(exp)}")

    axes: dict[str, CrystalAxis] = {}
    for sec_name, body in sections.items():
        if not sec_name.startswith("axis."):
            raise MaterialValidationError(f"unknown section [{sec_name}]")
        label = sec_name[len("axis."):]
        if not label:
            raise MaterialValidationError("axis section needs a label: [axis.<LABEL>]")
        axes[label] = _build_axis(label, body)
    if not axes:
        raise MaterialValidationError("material defines no axes")

    model = MaterialModel(name=name, axes=axes, expansion=expansion,
                          temp_range_c=temp_range, source=source)
    _validate(model)
    model.require_axes(require_axes)
    return model


def load_material_file(path, require_axes=()) -> MaterialModel:
    p = Path(path)
    return load_material(p.read_text(encoding="utf-8"), require_axes, source=str(p))


def bundled_names() -> list[str]:
    files = resources.files("qpm_lab").joinpath("data")
    return sorted(f.name[:-4] for f in files.iterdir() if f.name.endswith(".mat"))


def bundled_material(name: str, require_axes=()) -> MaterialModel:
    """Load one of the materials shipped with the package (``ktp``, ``yvo4``)."""
    res = resources.files("qpm_lab").joinpath("data").joinpath(f"{name}.mat")
    if not res.is_file():
        raise MaterialError(
            f"no bundled material {name!r} (available: {bundled_names()})")
    return load_material(res.read_text(encoding="utf-8"), require_axes,
                         source=f"bundled:{name}")
