"""Joint spectral amplitudes of a down-conversion photon-pair source.

Two model profiles are provided.  Both factor into a pump envelope along the
sum frequency and a phase-matching profile along the difference frequency:

* double Gaussian — exp(-2 ln2 (w-/dws)^2) * exp(-2 ln2 (w+/dwp)^2), where
  dws and dwp are the INTENSITY FWHMs along the difference and sum axes;
* sinc — sin(x)/x with x = w-/dws (first zeros at w- = +/- pi*dws), same
  Gaussian pump envelope.

Here w+ = (omega_s + omega_i) - pump_center and
w- = (omega_s - omega_i) - (omega_s0 - omega_i0).  Interferometer delays are
NOT baked in here; this module describes the bare source.

Returned amplitudes are L2-normalized on their grid so that downstream
coincidence integrals read as probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError, TruncationError
from .grids import ComplexField2D, FrequencyGrid
from .units import LN2

__all__ = ["SpdcParams", "gaussian_jsa", "sinc_jsa"]

_MODELS = ("gaussian", "sinc")


@dataclass(frozen=True)
class SpdcParams:
    """Source description.

    omega_s0 / omega_i0: nominal signal / idler center frequencies, rad/s.
    pump_fwhm: intensity FWHM of the pump envelope along the sum axis, rad/s.
    single_photon_fwhm: width parameter of the phase-matching profile along
        the difference axis, rad/s (intensity FWHM for the Gaussian model,
        sinc scale for the sinc model).
    pump_center: sum-frequency at which the pump envelope peaks; defaults to
        omega_s0 + omega_i0.
    """

    omega_s0: float
    omega_i0: float
    pump_fwhm: float
    single_photon_fwhm: float
    pump_center: float | None = None
    model: str = "gaussian"

    def __post_init__(self) -> None:
        for name in ("omega_s0", "omega_i0", "pump_fwhm", "single_photon_fwhm"):
            if not getattr(self, name) > 0.0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.model not in _MODELS:
            raise InvalidArgumentError(
                f"unknown model {self.model!r}; expected one of {_MODELS}"
            )
        if self.pump_center is None:
            object.__setattr__(self, "pump_center", self.omega_s0 + self.omega_i0)

    def shifted(self, pump_offset: float) -> "SpdcParams":
        """Source with the pump retuned by pump_offset (split evenly over
        the two photons), as in a pump-frequency scan."""
        return replace(
            self,
            omega_s0=self.omega_s0 + 0.5 * pump_offset,
            omega_i0=self.omega_i0 + 0.5 * pump_offset,
            pump_center=self.pump_center + pump_offset,
        )


# ---------------------------------------------------------------------------
# model builders
# ---------------------------------------------------------------------------

def _detunings(params: SpdcParams, grid_s: FrequencyGrid, grid_i: FrequencyGrid):
    # Guard against grids that plainly do not look at the source: each grid
    # must contain its photon's center out to 2 difference-widths on both
    # sides.  (A shared square grid for a non-degenerate pair is fine as long
    # as it is wide enough to cover both centers.)
    lim = 2.0 * params.single_photon_fwhm
    for label, grid, w0 in (("signal", grid_s, params.omega_s0), ("idler", grid_i, params.omega_i0)):
        lo = grid.center - 0.5 * grid.span
        hi = grid.center + 0.5 * grid.span
        if w0 - lim < lo or w0 + lim > hi:
            raise InvalidArgumentError(
                f"{label} grid [{lo:.6g}, {hi:.6g}] rad/s does not cover its photon "
                f"band {w0:.6g} +/- {lim:.4g}"
            )
    ws = grid_s.samples[:, None]
    wi = grid_i.samples[None, :]
    d_plus = (ws + wi) - params.pump_center
    d_minus = (ws - wi) - (params.omega_s0 - params.omega_i0)
    return d_plus, d_minus


def _finish(params: SpdcParams, grid_s, grid_i, unnorm: np.ndarray, analytic_mass: float) -> ComplexField2D:
    # Truncation guard: compare the grid's trapezoidal |f|^2 mass against the
    # closed-form total.  A coarse grid that under-samples a narrow pump
    # ridge OVER-estimates the trapezoid mass (the ridge runs through the
    # sample diagonal), so this check only trips on genuine spill-over.
    field = ComplexField2D(grid_s, grid_i, unnorm)
    grid_mass = field.l2_mass()
    if grid_mass < 0.99 * analytic_mass:
        raise TruncationError(
            f"grid captures {grid_mass / analytic_mass:.1%} of the analytic mass; "
            "at least 1% falls outside the span — widen the grid"
        )
    return field.normalize_l2()


def gaussian_jsa(params: SpdcParams, grid_s: FrequencyGrid, grid_i: FrequencyGrid) -> ComplexField2D:
    """Double-Gaussian amplitude, L2-normalized on the grid.

    The result is real and non-negative with its maximum at the sample
    nearest (omega_s0, omega_i0).  Raises TruncationError when more than 1%
    of the analytic intensity mass lies outside the grid.
    """
    d_plus, d_minus = _detunings(params, grid_s, grid_i)
    dws = params.single_photon_fwhm
    dwp = params.pump_fwhm
    unnorm = np.exp(-2.0 * LN2 * (d_minus / dws) ** 2) * np.exp(
        -2.0 * LN2 * (d_plus / dwp) ** 2
    )
    # total of |f|^2 over the plane: product of two Gaussian line integrals,
    # times the 1/2 Jacobian of (w+, w-) -> (ws, wi).
    analytic_mass = np.pi * dws * dwp / (8.0 * LN2)
    return _finish(params, grid_s, grid_i, unnorm.astype(complex), analytic_mass)


def sinc_jsa(params: SpdcParams, grid_s: FrequencyGrid, grid_i: FrequencyGrid) -> ComplexField2D:
    """Sinc phase-matching profile with a Gaussian pump envelope.

    sin(x)/x with x = w-/single_photon_fwhm; no pi rescaling, so the first
    zeros sit at w- = +/- pi * single_photon_fwhm.  Values change sign.
    """
    d_plus, d_minus = _detunings(params, grid_s, grid_i)
    dws = params.single_photon_fwhm
    dwp = params.pump_fwhm
    # np.sinc is sin(pi x)/(pi x); undo the pi convention.
    pm = np.sinc(d_minus / dws / np.pi)
    unnorm = pm * np.exp(-2.0 * LN2 * (d_plus / dwp) ** 2)
    # integral of sinc^2(v/dws) dv = pi*dws; Gaussian line integral as above.
    analytic_mass = 0.5 * np.pi * dws * dwp * np.sqrt(np.pi / (4.0 * LN2))
    return _finish(params, grid_s, grid_i, unnorm.astype(complex), analytic_mass)


def build_jsa(params: SpdcParams, grid_s: FrequencyGrid, grid_i: FrequencyGrid) -> ComplexField2D:
    """Dispatch on params.model."""
    if params.model == "gaussian":
        return gaussian_jsa(params, grid_s, grid_i)
    return sinc_jsa(params, grid_s, grid_i)
