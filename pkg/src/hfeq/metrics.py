"""Entanglement and dimensionality measures for two-photon spectra.

Three complementary quantifiers live here:

* schmidt_number — continuous-variable mode count K = 1/sum(l_n^2) from the
  singular values of the sampled amplitude;
* estimate_dimension — discrete bin count D of a combed single-photon
  spectrum: bins on the lattice center + k*pi/tau_H, counted when their
  windowed weight clears a threshold (default 5% of the heaviest bin),
  forced odd by symmetric inclusion;
* kf_from_visibility — a lower bound on K from a measured comb visibility,
  obtained by sweeping the pump bandwidth through the full forward model
  (comb + instrument blur), tabulating (V, K) pairs, and inverting the
  monotone curve.

extract_bin carves one bin out of the joint amplitude with a raised-cosine
edged window on the signal axis; windows of adjacent bins overlap-add to
unity, so summing all bins reassembles the marginal up to edge leakage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInputError,
    InvalidArgumentError,
    NumericError,
    RangeError,
)
from .grids import (
    ComplexField2D,
    FrequencyGrid,
    RealField2D,
    Spectrum1D,
    convolve_gaussian,
    marginal_spectrum,
)
from .interferometer import InterferometerConfig, tpes_jsa
from .jsa import SpdcParams, gaussian_jsa

__all__ = [
    "SchmidtResult",
    "BinDecomposition",
    "KfBound",
    "single_mode_spectrum",
    "hom_visibility",
    "schmidt_number",
    "estimate_dimension",
    "extract_bin",
    "kf_curve",
    "kf_from_visibility",
]


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchmidtResult:
    """Normalized Schmidt spectrum (descending) and its effective mode count."""

    coefficients: np.ndarray
    schmidt_number: float

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise InvalidArgumentError("coefficients must be a non-empty 1D array")
        if float(c.min()) < 0.0 or np.any(np.diff(c) > 0.0):
            raise InvalidArgumentError("coefficients must be non-negative and descending")
        if abs(float(c.sum()) - 1.0) > 1e-8:
            raise InvalidArgumentError("coefficients must sum to 1")
        if self.schmidt_number < 1.0 - 1e-10:
            raise InvalidArgumentError("schmidt_number below 1")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)


@dataclass(frozen=True)
class BinDecomposition:
    """Discrete frequency-bin structure of a combed spectrum.

    bin_centers are ascending, symmetric about the comb center; bin_weights
    are the windowed spectral weights normalized over the counted bins.
    dimension is the (odd) number of counted bins.
    """

    bin_centers: np.ndarray
    bin_weights: np.ndarray
    window_half_width: float
    dimension: int

    def __post_init__(self) -> None:
        c = np.asarray(self.bin_centers, dtype=float)
        w = np.asarray(self.bin_weights, dtype=float)
        if c.shape != w.shape or c.ndim != 1:
            raise InvalidArgumentError("bin_centers and bin_weights must be equal-length 1D")
        if self.dimension != c.size or self.dimension % 2 != 1:
            raise InvalidArgumentError("dimension must be odd and equal to the bin count")
        if float(w.min()) < 0.0 or abs(float(w.sum()) - 1.0) > 1e-8:
            raise InvalidArgumentError("bin_weights must be non-negative and sum to 1")
        if not self.window_half_width > 0.0:
            raise InvalidArgumentError("window_half_width must be positive")
        c.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "bin_centers", c)
        object.__setattr__(self, "bin_weights", w)


class KfBound(float):
    """Float subclass: the mode-count lower bound, plus how it was obtained.

    saturated is True when the requested visibility sits at or above the top
    of the tabulated curve (the bound is then the ladder maximum, not an
    interior inversion).  curve_v / curve_k expose the tabulated pairs.
    """

    saturated: bool
    curve_v: np.ndarray
    curve_k: np.ndarray

    def __new__(cls, value: float, saturated: bool, curve_v, curve_k):
        obj = super().__new__(cls, value)
        obj.saturated = bool(saturated)
        obj.curve_v = np.asarray(curve_v, dtype=float)
        obj.curve_k = np.asarray(curve_k, dtype=float)
        return obj


# ---------------------------------------------------------------------------
# spectra and visibility
# ---------------------------------------------------------------------------

def single_mode_spectrum(jsi: RealField2D) -> Spectrum1D:
    """Signal-photon spectrum: the joint intensity with the idler traced out."""
    return marginal_spectrum(jsi, axis="signal")


def hom_visibility(spec: Spectrum1D, reference: Spectrum1D) -> float:
    """Fringe contrast of a combed spectrum against its envelope reference.

    The spectrum is divided by the reference and the contrast
    (max - min)/(max + min) of that ratio is taken, restricted to the region
    where the reference is at least 1% of its peak — outside it the division
    amplifies tails into garbage.
    """
    if spec.grid != reference.grid:
        raise InvalidArgumentError("spectrum and reference must share a grid")
    ref = reference.values
    peak = float(ref.max(initial=0.0))
    if peak <= 0.0:
        raise InvalidArgumentError("reference has no positive values")
    mask = ref >= 0.01 * peak
    idx = np.flatnonzero(mask)
    # a zero bracketed by in-region samples poisons the ratio next to it
    if np.any(ref[idx[0] : idx[-1] + 1] <= 0.0):
        raise InvalidArgumentError("reference has zeros inside the evaluation region")
    ratio = spec.values[mask] / ref[mask]
    hi = float(ratio.max())
    lo = float(ratio.min())
    if hi + lo == 0.0:
        return 0.0
    return (hi - lo) / (hi + lo)


# ---------------------------------------------------------------------------
# Schmidt decomposition
# ---------------------------------------------------------------------------

def schmidt_number(jsa: ComplexField2D) -> SchmidtResult:
    """Singular-value mode analysis of the sampled amplitude.

    The matrix is scaled by sqrt(spacing_s * spacing_i) so the squared
    singular values approximate the continuous decomposition's weights
    regardless of grid resolution; they are then normalized to sum to 1.
    """
    if jsa.grid_s.n_points != jsa.grid_i.n_points:
        raise InvalidArgumentError("schmidt_number needs a square grid")
    if not np.all(np.isfinite(jsa.values)):
        raise InvalidArgumentError("amplitude contains non-finite values")
    try:
        s = np.linalg.svd(jsa.values, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure path
        raise NumericError(f"singular value decomposition failed: {exc}") from exc
    lam = s * s * (jsa.grid_s.spacing * jsa.grid_i.spacing)
    total = float(lam.sum())
    if total <= 0.0:
        raise InvalidArgumentError("zero amplitude has no Schmidt decomposition")
    lam = lam / total
    k = 1.0 / float((lam * lam).sum())
    return SchmidtResult(coefficients=lam, schmidt_number=k)


# ---------------------------------------------------------------------------
# discrete bins
# ---------------------------------------------------------------------------

def _raised_cosine_window(x: np.ndarray, center: float, half_width: float, edge: float) -> np.ndarray:
    """Flat-top window, 1 inside, 0 outside, cosine ramp of width `edge`
    centered on each nominal boundary.  Adjacent windows whose boundaries
    coincide overlap-add to exactly 1."""
    d = np.abs(x - center)
    inner = half_width - 0.5 * edge
    w = np.zeros_like(x)
    w[d <= inner] = 1.0
    ramp = (d > inner) & (d < inner + edge)
    w[ramp] = 0.5 * (1.0 + np.cos(np.pi * (d[ramp] - inner) / edge))
    return w


def estimate_dimension(
    spec: Spectrum1D,
    tau_H: float,
    threshold: float = 0.05,
    window_half_width: float | None = None,
) -> BinDecomposition:
    """Count the frequency bins of a combed spectrum.

    Teeth are expected on the lattice center + k*pi/tau_H; each lattice site
    gets the windowed integral of the spectrum as its weight, sites at or
    above `threshold` times the heaviest weight are counted, and the count
    is forced odd by always including a site together with its mirror.
    """
    if not tau_H > 0.0:
        raise InvalidArgumentError("tau_H must be positive to define a bin lattice")
    if not 0.0 < threshold < 1.0:
        raise InvalidArgumentError("threshold must sit strictly between 0 and 1")
    x = spec.grid.samples
    y = spec.values
    total = float(np.trapezoid(y, dx=spec.grid.spacing))
    if y.max(initial=0.0) <= 0.0 or total <= 0.0:
        raise DegenerateInputError("spectrum has no peak to anchor a bin lattice")
    if y.size < 3:
        raise DegenerateInputError("spectrum too short to contain a peak")
    mid = y[1:-1]
    has_peak = (
        (mid >= y[:-2])
        & (mid >= y[2:])
        & ((mid > y[:-2]) | (mid > y[2:]))
        & (mid >= threshold * y.max())
    )
    if not np.any(has_peak):
        raise DegenerateInputError("spectrum has no interior peak above threshold")

    pitch = np.pi / tau_H
    if window_half_width is None:
        window_half_width = 0.5 * pitch
    edge = spec.grid.spacing

    center = float(np.trapezoid(x * y, dx=spec.grid.spacing) / total)
    k_max = int(np.floor(max(x[-1] - center, center - x[0]) / pitch))
    ks = np.arange(-k_max, k_max + 1)
    weights = np.empty(ks.size)
    for j, k in enumerate(ks):
        w = _raised_cosine_window(x, center + k * pitch, window_half_width, edge)
        weights[j] = float(np.trapezoid(y * w, dx=spec.grid.spacing))
    wmax = float(weights.max())
    if wmax <= 0.0:
        raise DegenerateInputError("no bin weight above zero on the lattice")

    counted = {int(k) for k, w in zip(ks, weights) if w >= threshold * wmax}
    counted |= {-k for k in counted}  # symmetric inclusion keeps the count odd
    if len(counted) % 2 == 0:
        counted.add(0)
    sel = sorted(counted)
    centers = center + pitch * np.asarray(sel, dtype=float)
    sel_w = np.array([weights[list(ks).index(k)] for k in sel])
    sel_w = sel_w / sel_w.sum()
    return BinDecomposition(
        bin_centers=centers,
        bin_weights=sel_w,
        window_half_width=float(window_half_width),
        dimension=len(sel),
    )


def extract_bin(jsa: ComplexField2D, decomp: BinDecomposition, n: int) -> ComplexField2D:
    """Window the amplitude onto bin n of the decomposition.

    n indexes bins relative to the central one: 0 is central,
    +/-1 its neighbors, out to +/-(D-1)/2.  The window acts on the signal
    axis only; for an anti-correlated amplitude the idler side selects its
    conjugate bin automatically.
    """
    half = (decomp.dimension - 1) // 2
    if abs(n) > half:
        raise RangeError(f"bin index {n} outside +/-{half} for D={decomp.dimension}")
    center = float(decomp.bin_centers[half + n])
    w = _raised_cosine_window(
        jsa.grid_s.samples, center, decomp.window_half_width, jsa.grid_s.spacing
    )
    return ComplexField2D(jsa.grid_s, jsa.grid_i, jsa.values * w[:, None])


# ---------------------------------------------------------------------------
# visibility -> mode-count bound
# ---------------------------------------------------------------------------

def kf_curve(
    tau_H: float,
    jitter_fwhm: float,
    delta_omega_S: float,
    ladder: np.ndarray | None = None,
    n_cap: int = 2048,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tabulate (visibility, mode count) along a pump-bandwidth ladder.

    For each pump width the full forward model runs: combed joint amplitude
    at delay tau_H, signal marginal, instrument blur of FWHM jitter_fwhm,
    contrast against the equally blurred comb-free marginal; the mode count
    is the Schmidt number of the unblurred combed amplitude.  Returns
    (visibilities, mode_counts, pump_widths) with pump widths descending —
    both other arrays then ascend.
    """
    if not tau_H > 0.0:
        raise InvalidArgumentError("tau_H must be positive")
    if jitter_fwhm < 0.0:
        raise InvalidArgumentError("jitter_fwhm must be >= 0")
    if ladder is None:
        ladder = delta_omega_S * 2.0 ** -np.arange(0.0, 7.0 + 1e-9, 1.0 / 3.0)
    ladder = np.asarray(ladder, dtype=float)

    vs = np.empty(ladder.size)
    kf = np.empty(ladder.size)
    w0 = 20.0 * delta_omega_S  # arbitrary carrier; the comb only sees differences
    cfg = InterferometerConfig(tau_H=tau_H, tau_F=0.0)
    for j, dwp in enumerate(ladder):
        span = 4.0 * delta_omega_S
        h_need = min(dwp / 4.0, np.pi / (8.0 * tau_H), delta_omega_S / 16.0)
        if jitter_fwhm > 0.0:
            # convolve_gaussian needs >= 4 samples per blur FWHM
            h_need = min(h_need, jitter_fwhm / 4.0)
        n = min(int(np.ceil(span / h_need)) + 1, n_cap)
        grid = FrequencyGrid(center=w0, span=span, n_points=n)
        params = SpdcParams(
            omega_s0=w0, omega_i0=w0, pump_fwhm=float(dwp), single_photon_fwhm=delta_omega_S
        )
        f = gaussian_jsa(params, grid, grid)
        combed = tpes_jsa(f, cfg)
        kf[j] = schmidt_number(combed).schmidt_number
        comb_marg = single_mode_spectrum(combed.intensity())
        ref_marg = single_mode_spectrum(f.intensity())
        if jitter_fwhm > 0.0:
            comb_marg = convolve_gaussian(comb_marg, jitter_fwhm)
            ref_marg = convolve_gaussian(ref_marg, jitter_fwhm)
        vs[j] = hom_visibility(comb_marg, ref_marg)
    return vs, kf, ladder


def kf_from_visibility(
    v_h: float,
    tau_H: float,
    jitter_fwhm: float,
    delta_omega_S: float,
    curve: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> KfBound:
    """Largest tabulated mode count whose predicted visibility is <= v_h.

    Because narrowing the pump raises both the predicted visibility and the
    mode count, this inversion is a conservative lower bound on the true
    mode count of whatever produced the measured contrast.  Below the curve
    minimum there is nothing to return and the curve extremes are reported;
    at or above the maximum the top of the ladder is returned with the
    saturation flag set.
    """
    if not 0.0 < v_h <= 1.0:
        raise InvalidArgumentError(f"v_h must lie in (0, 1], got {v_h}")
    if curve is None:
        curve = kf_curve(tau_H, jitter_fwhm, delta_omega_S)
    vs, kf, _ = curve
    eligible = vs <= v_h
    if not np.any(eligible):
        raise RangeError(
            f"visibility {v_h:.4f} below the model curve: the tabulated curve spans "
            f"V in [{vs.min():.4f}, {vs.max():.4f}], K in [{kf.min():.3f}, {kf.max():.3f}]"
        )
    bound = float(kf[eligible].max())
    saturated = bool(v_h >= float(vs.max()))
    return KfBound(bound, saturated=saturated, curve_v=vs, curve_k=kf)
