"""Design toolkit for temperature-insensitive Type II quasi-phasematched
SPDC in periodically poled KTP: dispersion models, phasematching solvers,
emission-spectrum scans, birefringent phase compensation and
polarization-entanglement quality estimates."""

from .materials import (
    MaterialError,
    MaterialModel,
    MaterialParseError,
    MaterialValidationError,
    UnknownAxisError,
    WavelengthRangeError,
    bundled_material,
    load_material,
    load_material_file,
)
from .qpm import (
    DEFAULT_AXES,
    PhasematchError,
    QpmProcess,
    degenerate_pump_wavelength,
    delta_k,
    idler_wavelength,
    phase_mismatch,
    solve_phasematched_signal,
    solve_poling_period,
    spdc_intensity,
    unpoled_mismatch,
)
from .spectra import (
    InsensitivityReport,
    PumpTuningModel,
    SpectrumError,
    SpectrumGrid,
    TemperatureScan,
    branch_fwhm,
    crystal_temperature_scan,
    default_wavelength_grid,
    insensitivity_report,
    pump_temperature_scan,
    spdc_spectrum,
)
from .compensation import (
    CompensationError,
    CompensatorSpec,
    PhaseProfile,
    default_band,
    optimize_compensator_length,
    pair_phase,
    phase_profile,
)
from .polarization import (
    PolarizationError,
    TwoPhotonState,
    VisibilitySet,
    coincidence_curve,
    fidelity_from_visibilities,
    visibility_from_extremes,
    visibility_from_phase,
)

__version__ = "0.1.0"
