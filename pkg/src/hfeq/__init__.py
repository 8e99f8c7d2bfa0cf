"""Simulation and analysis toolkit for hybrid frequency-entangled photon
pairs: joint spectra, cascaded two-photon interference, Schmidt and
frequency-bin analysis, a photon-counting measurement chain, and the fits
that recover parameters from counts."""

from .errors import (
    ConfigError,
    DegenerateInputError,
    HfeqError,
    InvalidArgumentError,
    NumericError,
    PreconditionError,
    RangeError,
    ResolutionError,
    TruncationError,
)
from .grids import (
    ComplexField2D,
    FrequencyGrid,
    RealField2D,
    Spectrum1D,
    convolve_gaussian,
    integrate_2d,
    make_grid,
    marginal_spectrum,
)
from .jsa import SpdcParams, build_jsa, gaussian_jsa, sinc_jsa
from .interferometer import (
    FringeScan,
    InterferometerConfig,
    coincidence_probability,
    default_scan_grid,
    fringe_scan,
    satellite_jsi,
    tpes_jsa,
)
from .metrics import (
    BinDecomposition,
    KfBound,
    SchmidtResult,
    estimate_dimension,
    extract_bin,
    hom_visibility,
    kf_curve,
    kf_from_visibility,
    schmidt_number,
    single_mode_spectrum,
)
from .detection import (
    BackgroundSubtracted,
    CountHistogram,
    NoiseModel,
    TofsCalibration,
    histogram_to_frequency,
    jitter_fwhm_omega,
    omega_from_time,
    subtract_background,
    synthesize_counts,
    time_from_omega,
    tofs_time,
    tofs_wavelength,
    write_histogram_csv,
)
from .fits import FitResult, fit_comb, fit_fringe, fit_linear_calibration
from .scenarios import Scenario, get_scenario, list_scenarios, load_config, run_scenario

__version__ = "0.1.0"
