"""Cascaded two-photon interferometer acting on a joint spectral amplitude.

The device has two delay stages.  A balanced-splitter stage with relative
delay tau_H interferes a photon pair against its frequency-exchanged copy
and writes fringes along the difference frequency; an unbalanced arm pair
with path imbalance tau_F = tau_long - tau_short post-selects indistinct
arrival and writes fringes along the absolute sum frequency.  The
coincidence-gated output amplitude, up to a dropped global phase, is

    A(ws, wi) = 1/2 [ f(ws, wi) + f(wi, ws) e^{-i (ws - wi) tau_H} ]
                * cos((ws + wi) tau_F / 2)

("exchange" form).  For exchange-symmetric inputs the algebraically
equivalent product form f * cos((ws-wi) tau_H/2) * cos((ws+wi) tau_F/2)
differs only by a phase along the difference axis, so the two forms carry
identical intensities.

The cross terms in which the photons take opposite unbalanced arms are
rejected by the coincidence gate's timing; their spectra are available via
satellite_jsi.  Output amplitudes are NOT renormalized — their squared mass
is the detection probability of the selected term.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError, ResolutionError
from .grids import ComplexField2D, FrequencyGrid, RealField2D, integrate_2d
from .jsa import SpdcParams, build_jsa

__all__ = [
    "InterferometerConfig",
    "FringeScan",
    "tpes_jsa",
    "satellite_jsi",
    "coincidence_probability",
    "fringe_scan",
    "default_scan_grid",
]

_PHASE_MODES = ("delay_scan", "pump_scan")


@dataclass(frozen=True)
class InterferometerConfig:
    """Delays of the two interference stages.

    tau_H: exchange-stage delay, seconds.  A negative value describes the
        mirrored device and is normalized to (|tau_H|, mirror=True), which
        swaps the roles of the two photons.
    tau_F: arm imbalance, seconds.  Give it directly, or give tau_long and
        tau_short and it is derived as their difference; giving both ways
        inconsistently is rejected.
    phase_mode: how fringe_scan interprets its scan values — "delay_scan"
        scans tau_F itself, "pump_scan" scans the pump center frequency
        at fixed delays.
    """

    tau_H: float
    tau_F: float | None = None
    tau_long: float | None = None
    tau_short: float | None = None
    phase_mode: str = "delay_scan"
    mirror: bool = False

    def __post_init__(self) -> None:
        if self.phase_mode not in _PHASE_MODES:
            raise InvalidArgumentError(
                f"phase_mode must be one of {_PHASE_MODES}, got {self.phase_mode!r}"
            )
        if self.tau_H < 0.0:
            object.__setattr__(self, "tau_H", -self.tau_H)
            object.__setattr__(self, "mirror", not self.mirror)
        if (self.tau_long is None) != (self.tau_short is None):
            raise InvalidArgumentError("give both tau_long and tau_short or neither")
        if self.tau_long is not None:
            derived = self.tau_long - self.tau_short
            if self.tau_F is not None and self.tau_F != derived:
                raise InvalidArgumentError(
                    f"tau_F={self.tau_F} inconsistent with tau_long-tau_short={derived}"
                )
            object.__setattr__(self, "tau_F", derived)
        elif self.tau_F is None:
            object.__setattr__(self, "tau_F", 0.0)

    def with_tau_f(self, tau_f: float) -> "InterferometerConfig":
        return replace(self, tau_F=tau_f, tau_long=None, tau_short=None)


@dataclass(frozen=True)
class FringeScan:
    """Coincidence probability versus the scanned variable."""

    scan_values: np.ndarray
    probabilities: np.ndarray
    mode: str

    def __post_init__(self) -> None:
        sv = np.asarray(self.scan_values, dtype=float)
        pv = np.asarray(self.probabilities, dtype=float)
        if sv.shape != pv.shape or sv.ndim != 1:
            raise InvalidArgumentError("scan_values and probabilities must be equal-length 1D")
        sv.setflags(write=False)
        pv.setflags(write=False)
        object.__setattr__(self, "scan_values", sv)
        object.__setattr__(self, "probabilities", pv)


# ---------------------------------------------------------------------------
# grid checks
# ---------------------------------------------------------------------------

def _require_square(jsa: ComplexField2D, op: str) -> None:
    if jsa.grid_s != jsa.grid_i:
        raise InvalidArgumentError(
            f"{op} needs identical signal and idler grids (the frequency "
            "exchange maps samples onto samples only on a shared grid)"
        )


def _require_nyquist(grid: FrequencyGrid, tau_h: float, tau_f: float) -> None:
    # The fastest spectral phase is max(tau_H, tau_F/2); four samples per
    # half-oscillation keeps trapezoidal sums honest.  The 1 fs floor only
    # guards against absurd grids when both delays are zero.
    tau_max = max(abs(tau_h), 0.5 * abs(tau_f), 1e-15)
    limit = np.pi / (4.0 * tau_max)
    if grid.spacing > limit:
        raise ResolutionError(
            f"grid spacing {grid.spacing:.4g} rad/s exceeds pi/(4*tau) = {limit:.4g}; "
            "increase n_points or shrink the span"
        )


def _exchange_phase(jsa: ComplexField2D, tau_h: float) -> np.ndarray:
    ws = jsa.grid_s.samples[:, None]
    wi = jsa.grid_i.samples[None, :]
    return np.exp(-1j * (ws - wi) * tau_h)


# ---------------------------------------------------------------------------
# core operations
# ---------------------------------------------------------------------------

def tpes_jsa(jsa: ComplexField2D, cfg: InterferometerConfig, form: str = "exchange") -> ComplexField2D:
    """Coincidence-gated output amplitude of the cascaded interferometer.

    form="exchange" is the general path; form="product" is the factored
    variant exact for exchange-symmetric amplitudes (same intensity, phase
    differs along the difference axis).  The output keeps the input's
    normalization (it is a post-selected, lossy term — do not renormalize
    before reading probabilities).
    """
    _require_square(jsa, "tpes_jsa")
    _require_nyquist(jsa.grid_s, cfg.tau_H, cfg.tau_F)
    base = jsa.values.T if cfg.mirror else jsa.values
    ws = jsa.grid_s.samples[:, None]
    wi = jsa.grid_i.samples[None, :]
    franson = np.cos((ws + wi) * cfg.tau_F / 2.0)
    if form == "exchange":
        hom = 0.5 * (base + base.T * _exchange_phase(jsa, cfg.tau_H))
    elif form == "product":
        hom = base * np.cos((ws - wi) * cfg.tau_H / 2.0)
    else:
        raise InvalidArgumentError(f"form must be 'exchange' or 'product', got {form!r}")
    return ComplexField2D(jsa.grid_s, jsa.grid_i, hom * franson)


def satellite_jsi(jsa: ComplexField2D, tau_H: float) -> RealField2D:
    """Intensity of one opposite-arm (time-shifted) coincidence term.

    There are two such terms, mirror images in arrival order, each with
    intensity |f - f_exchanged e^{-i (ws-wi) tau_H}|^2 / 16.  For an
    exchange-symmetric amplitude at tau_H = 0 the subtraction cancels
    bitwise and the output is exactly zero.
    """
    _require_square(jsa, "satellite_jsi")
    _require_nyquist(jsa.grid_s, tau_H, 0.0)
    f = jsa.values
    amp = f - f.T * _exchange_phase(jsa, tau_H)
    return RealField2D(jsa.grid_s, jsa.grid_i, np.abs(amp) ** 2 / 16.0)


def coincidence_probability(jsi: RealField2D) -> float:
    """Integrated intensity — the probability of the selected term."""
    return integrate_2d(jsi)


# ---------------------------------------------------------------------------
# fringe scans
# ---------------------------------------------------------------------------

def default_scan_grid(params: SpdcParams, cfg: InterferometerConfig, max_tau_f: float, n_cap: int = 4096) -> FrequencyGrid:
    """Shared square grid wide enough for the source and fine enough for the
    fastest phase AND the pump ridge.

    Extent: +/- 4x the larger bandwidth around the degenerate center.
    Refusing (rather than silently subsampling) keeps fringe visibilities
    honest: an under-resolved pump ridge fakes perfect contrast.
    """
    dws = params.single_photon_fwhm
    dwp = params.pump_fwhm
    span = 8.0 * max(dws, dwp)
    tau_max = max(abs(cfg.tau_H), 0.5 * abs(max_tau_f), 1e-15)
    h_need = min(np.pi / (4.0 * tau_max), dwp / 4.0, dws / 4.0)
    n = int(np.ceil(span / h_need)) + 1
    n = max(n, 257)
    if n > n_cap:
        raise ResolutionError(
            f"default scan grid would need {n} points per axis (cap {n_cap}); "
            "pass an explicit grid or reduce the delay/bandwidth ratio"
        )
    center = 0.5 * (params.omega_s0 + params.omega_i0)
    return FrequencyGrid(center=center, span=span, n_points=n)


def fringe_scan(
    params: SpdcParams,
    cfg: InterferometerConfig,
    scan_values,
    grid: FrequencyGrid | None = None,
) -> FringeScan:
    """Coincidence probability along a fringe scan.

    delay_scan: scan_values are tau_F values (seconds); the source amplitude
    is built once and only the sum-frequency factor is re-evaluated.
    pump_scan: scan_values are pump-center offsets (rad/s); the source is
    rebuilt per point (offset split evenly between the photon centers) and
    the delays stay fixed.
    """
    scan = np.asarray(scan_values, dtype=float)
    if scan.ndim != 1 or scan.size == 0:
        raise InvalidArgumentError("scan_values must be a non-empty 1D sequence")

    if cfg.phase_mode == "delay_scan":
        if grid is None:
            grid = default_scan_grid(params, cfg, float(np.max(np.abs(scan))))
        f = build_jsa(params, grid, grid)
        _require_nyquist(grid, cfg.tau_H, float(np.max(np.abs(scan))))
        fin = f.values.T if cfg.mirror else f.values
        base = 0.5 * (fin + fin.T * _exchange_phase(f, cfg.tau_H))
        hom_int = np.abs(base) ** 2
        wsum = f.grid_s.samples[:, None] + f.grid_i.samples[None, :]
        h = grid.spacing
        probs = np.empty_like(scan)
        for k, tf in enumerate(scan):
            vals = hom_int * np.cos(wsum * tf / 2.0) ** 2
            probs[k] = float(np.trapezoid(np.trapezoid(vals, dx=h, axis=1), dx=h))
        return FringeScan(scan, probs, "delay_scan")

    # pump_scan
    if grid is None:
        grid = default_scan_grid(params, cfg, cfg.tau_F)
    probs = np.empty_like(scan)
    for k, off in enumerate(scan):
        f = build_jsa(params.shifted(float(off)), grid, grid)
        out = tpes_jsa(f, cfg)
        probs[k] = coincidence_probability(out.intensity())
    return FringeScan(scan, probs, "pump_scan")
