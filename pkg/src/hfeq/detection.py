"""Measurement chain: dispersive frequency-to-time mapping, timing jitter,
and Poisson count synthesis.

A long dispersive fiber maps photon wavelength to arrival time through an
affine calibration t = slope * lambda + intercept (slope in ns/nm, negative
for anomalous dispersion, so later wavelengths arrive earlier and — after
the lambda = 2 pi c / omega reversal — arrival time INCREASES with angular
frequency).  System timing jitter blurs the spectrum; because an affine map
commutes with convolution up to the slope factor, the blur is applied once
in the frequency domain before mapping.

Counts are drawn per histogram bin from a counter-based generator keyed by
(seed, bin index): the same seed always reproduces the same histogram
bitwise, no matter how many bins are drawn, in which order, or on how many
threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, RangeError, ResolutionError
from .grids import Spectrum1D, convolve_gaussian
from .units import C_LIGHT, TWO_PI, omega_to_wavelength_nm, wavelength_nm_to_omega

__all__ = [
    "TofsCalibration",
    "NoiseModel",
    "CountHistogram",
    "BackgroundSubtracted",
    "tofs_time",
    "tofs_wavelength",
    "omega_from_time",
    "time_from_omega",
    "jitter_fwhm_omega",
    "synthesize_counts",
    "subtract_background",
    "histogram_to_frequency",
    "write_histogram_csv",
]


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TofsCalibration:
    """Affine wavelength-to-arrival-time calibration of the dispersive fiber.

    slope_ns_per_nm / intercept_ns define t[ns] = slope * lambda[nm] +
    intercept; jitter_fwhm is the full system timing jitter in seconds;
    band_nm is the wavelength range over which the calibration is trusted.
    """

    slope_ns_per_nm: float
    intercept_ns: float
    jitter_fwhm: float = 49.1e-12
    band_nm: tuple[float, float] = (1540.0, 1560.0)

    def __post_init__(self) -> None:
        if self.slope_ns_per_nm == 0.0:
            raise InvalidArgumentError("calibration slope must be nonzero")
        if self.jitter_fwhm < 0.0:
            raise InvalidArgumentError("jitter_fwhm must be >= 0")
        lo, hi = self.band_nm
        if not lo < hi:
            raise InvalidArgumentError(f"band_nm must be (low, high), got {self.band_nm}")


def _check_band(lambda_nm: np.ndarray | float, cal: TofsCalibration) -> None:
    lam = np.asarray(lambda_nm, dtype=float)
    lo, hi = cal.band_nm
    if np.any(lam < lo) or np.any(lam > hi):
        raise RangeError(
            f"wavelength {float(lam.min()):.3f}..{float(lam.max()):.3f} nm outside the "
            f"calibrated band {lo:.1f}..{hi:.1f} nm"
        )


def tofs_time(lambda_nm, cal: TofsCalibration):
    """Arrival time in ns for a wavelength (nm) inside the calibrated band."""
    _check_band(lambda_nm, cal)
    return cal.slope_ns_per_nm * np.asarray(lambda_nm, dtype=float) + cal.intercept_ns


def tofs_wavelength(time_ns, cal: TofsCalibration):
    """Inverse map: arrival time in ns -> wavelength in nm (band-checked)."""
    lam = (np.asarray(time_ns, dtype=float) - cal.intercept_ns) / cal.slope_ns_per_nm
    _check_band(lam, cal)
    return lam


def omega_from_time(time_ns, cal: TofsCalibration):
    """Arrival time in ns -> angular frequency in rad/s."""
    lam = tofs_wavelength(time_ns, cal)
    return TWO_PI * C_LIGHT / (lam * 1e-9)


def time_from_omega(omega, cal: TofsCalibration):
    """Angular frequency in rad/s -> arrival time in ns."""
    lam = TWO_PI * C_LIGHT / np.asarray(omega, dtype=float) * 1e9
    return tofs_time(lam, cal)


def jitter_fwhm_omega(cal: TofsCalibration, lambda_nm: float) -> float:
    """Timing jitter expressed as a frequency blur FWHM (rad/s) at lambda_nm.

    Chain: jitter [s] / |slope| -> wavelength blur -> times d omega/d lambda
    = 2 pi c / lambda^2 at the working wavelength.
    """
    dlam_nm = (cal.jitter_fwhm * 1e9) / abs(cal.slope_ns_per_nm)
    lam_m = lambda_nm * 1e-9
    return TWO_PI * C_LIGHT * (dlam_nm * 1e-9) / (lam_m * lam_m)


# ---------------------------------------------------------------------------
# histograms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountHistogram:
    """Integer counts between monotone bin edges.

    unit records what the edges mean: "s" for arrival time, "rad/s" for
    frequency (after histogram_to_frequency).
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    unit: str = "s"

    def __post_init__(self) -> None:
        e = np.asarray(self.bin_edges, dtype=float)
        c = np.asarray(self.counts)
        if e.ndim != 1 or c.ndim != 1 or c.size != e.size - 1:
            raise InvalidArgumentError("need len(counts) == len(bin_edges) - 1")
        if np.any(np.diff(e) <= 0.0):
            raise InvalidArgumentError("bin edges must be strictly increasing")
        if not np.issubdtype(c.dtype, np.integer):
            raise InvalidArgumentError("counts must be integers")
        if c.size and int(c.min()) < 0:
            raise InvalidArgumentError("counts must be non-negative")
        e.setflags(write=False)
        object.__setattr__(self, "bin_edges", e)
        cc = c.astype(np.int64)
        cc.setflags(write=False)
        object.__setattr__(self, "counts", cc)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


@dataclass(frozen=True)
class BackgroundSubtracted:
    """Real-valued histogram after background removal (no re-quantization)."""

    bin_edges: np.ndarray
    values: np.ndarray
    unit: str = "s"

    def __post_init__(self) -> None:
        e = np.asarray(self.bin_edges, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if e.ndim != 1 or v.ndim != 1 or v.size != e.size - 1:
            raise InvalidArgumentError("need len(values) == len(bin_edges) - 1")
        e.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "bin_edges", e)
        object.__setattr__(self, "values", v)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


@dataclass(frozen=True)
class NoiseModel:
    """Counting statistics: flat background per bin, total signal budget, seed."""

    background_rate: float
    total_signal_counts: float
    rng_seed: int

    def __post_init__(self) -> None:
        if self.background_rate < 0.0 or self.total_signal_counts < 0.0:
            raise InvalidArgumentError("rates must be >= 0")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise InvalidArgumentError("rng_seed must fit in 64 bits")


def _poisson_draw(seed: int, index: int, lam: float) -> int:
    # One dedicated counter-based stream per bin: reproducible regardless of
    # evaluation order or parallel scheduling.
    key = np.array([seed, index], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return int(rng.poisson(lam))


def synthesize_counts(spec: Spectrum1D, cal: TofsCalibration, noise: NoiseModel) -> CountHistogram:
    """Simulate a counting measurement of a frequency spectrum.

    Pipeline: blur the spectrum with the jitter expressed in frequency units
    at the band center; map each frequency sample to an arrival-time bin
    (sample midpoints become bin edges); scale expected signal to
    total_signal_counts and add the flat background; draw an independent
    Poisson count per bin, keyed by (rng_seed, bin index).
    """
    omegas = spec.grid.samples
    lam_nm = omega_to_wavelength_nm(omegas[::-1])  # descending omega -> ascending lambda
    _check_band(lam_nm, cal)

    lam_center = omega_to_wavelength_nm(spec.grid.center)
    fwhm_w = jitter_fwhm_omega(cal, lam_center)

    # time bins must resolve the jitter kernel
    t_ns = np.asarray(time_from_omega(omegas, cal), dtype=float)  # ascending in omega
    bin_dt_s = float(np.min(np.abs(np.diff(t_ns)))) * 1e-9
    if cal.jitter_fwhm > 0.0 and cal.jitter_fwhm / bin_dt_s < 4.0:
        raise ResolutionError(
            f"time binning ({bin_dt_s * 1e12:.2f} ps/bin) under-resolves the "
            f"{cal.jitter_fwhm * 1e12:.2f} ps jitter kernel (need >= 4 bins per FWHM)"
        )

    blurred = convolve_gaussian(spec, fwhm_w) if fwhm_w > 0.0 else spec
    if float(blurred.values.min()) < 0.0 or float(blurred.values.max()) <= 0.0:
        raise InvalidArgumentError("spectrum must be non-negative with positive mass")

    # trapezoid weights turn sample values into per-bin expected mass
    h = spec.grid.spacing
    wq = np.full(omegas.size, h)
    wq[0] = wq[-1] = 0.5 * h
    mass = blurred.values * wq
    signal = mass / mass.sum() * noise.total_signal_counts
    expected = signal + noise.background_rate

    edges_ns = np.empty(t_ns.size + 1)
    edges_ns[1:-1] = 0.5 * (t_ns[:-1] + t_ns[1:])
    edges_ns[0] = t_ns[0] - 0.5 * (t_ns[1] - t_ns[0])
    edges_ns[-1] = t_ns[-1] + 0.5 * (t_ns[-1] - t_ns[-2])

    seed = int(noise.rng_seed)
    counts = np.fromiter(
        (_poisson_draw(seed, i, float(expected[i])) for i in range(expected.size)),
        dtype=np.int64,
        count=expected.size,
    )
    return CountHistogram(bin_edges=edges_ns * 1e-9, counts=counts, unit="s")


def subtract_background(hist: CountHistogram, background_estimate: float) -> BackgroundSubtracted:
    """Remove a flat background estimate, clamping at zero.

    Returns real values — subtracted data are no longer Poisson and are not
    re-quantized.
    """
    if background_estimate < 0.0:
        raise InvalidArgumentError("background_estimate must be >= 0")
    vals = np.maximum(hist.counts.astype(float) - background_estimate, 0.0)
    return BackgroundSubtracted(bin_edges=hist.bin_edges, values=vals, unit=hist.unit)


def histogram_to_frequency(hist: CountHistogram, cal: TofsCalibration) -> CountHistogram:
    """Re-express arrival-time bins as angular-frequency bins.

    The affine time map is monotone, so bin order and contents survive; the
    double reversal (time up with frequency) keeps edges ascending.
    """
    if hist.unit != "s":
        raise InvalidArgumentError(f"expected a time histogram, got unit {hist.unit!r}")
    edges_w = np.asarray(omega_from_time(hist.bin_edges * 1e9, cal), dtype=float)
    return CountHistogram(bin_edges=edges_w, counts=hist.counts.copy(), unit="rad/s")


def write_histogram_csv(hist: CountHistogram | BackgroundSubtracted, path) -> None:
    """CSV serialization: header names the units, columns bin_lo,bin_hi,count."""
    unit = hist.unit
    data = hist.counts if isinstance(hist, CountHistogram) else hist.values
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"bin_lo[{unit}],bin_hi[{unit}],count\n")
        for lo, hi, c in zip(hist.bin_edges[:-1], hist.bin_edges[1:], data):
            if isinstance(hist, CountHistogram):
                fh.write(f"{lo:.12g},{hi:.12g},{int(c)}\n")
            else:
                fh.write(f"{lo:.12g},{hi:.12g},{c:.12g}\n")
