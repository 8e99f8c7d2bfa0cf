"""Frequency grids, sampled fields, and the quadrature/convolution kernel.

The whole pipeline works on uniformly sampled angular-frequency grids.  A
two-photon amplitude is a complex matrix indexed [signal, idler]; intensities
are the same thing with real non-negative entries; 1D spectra ride on a
single grid.  Integration is trapezoidal throughout — on the smooth
Gaussian-type integrands used here it converges superalgebraically, and it
keeps marginalization exactly consistent with 2D integration (sum ordering
aside).

Grid convention: `make_grid(center, span, n)` samples the closed interval
[center - span/2, center + span/2] with n equidistant points, so the spacing
is span/(n-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError, ResolutionError
from .units import FWHM_TO_SIGMA

__all__ = [
    "FrequencyGrid",
    "ComplexField2D",
    "RealField2D",
    "Spectrum1D",
    "make_grid",
    "integrate_2d",
    "marginal_spectrum",
    "convolve_gaussian",
]


# ---------------------------------------------------------------------------
# grid and field containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform angular-frequency axis: center and full span in rad/s."""

    center: float
    span: float
    n_points: int

    def __post_init__(self) -> None:
        if self.n_points < 2:
            raise InvalidArgumentError(
                f"grid needs at least 2 points, got {self.n_points}"
            )
        if not (math.isfinite(self.center) and math.isfinite(self.span)):
            raise InvalidArgumentError(
                f"grid center/span must be finite, got ({self.center}, {self.span})"
            )
        if not self.span > 0.0:
            raise InvalidArgumentError(f"grid span must be positive, got {self.span}")

    @property
    def spacing(self) -> float:
        return self.span / (self.n_points - 1)

    @cached_property
    def samples(self) -> np.ndarray:
        s = self.center + np.linspace(-0.5 * self.span, 0.5 * self.span, self.n_points)
        s.setflags(write=False)
        return s


def make_grid(center: float, span: float, n_points: int) -> FrequencyGrid:
    """Build a uniform grid; rejects span <= 0 or fewer than two points."""
    return FrequencyGrid(center=float(center), span=float(span), n_points=int(n_points))


def _check_field_shape(grid_s: FrequencyGrid, grid_i: FrequencyGrid, values: np.ndarray) -> None:
    if values.ndim != 2 or values.shape != (grid_s.n_points, grid_i.n_points):
        raise InvalidArgumentError(
            f"field shape {values.shape} does not match grids "
            f"({grid_s.n_points}, {grid_i.n_points})"
        )
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("field contains non-finite values")


@dataclass(frozen=True)
class ComplexField2D:
    """Two-photon amplitude sampled on a (signal, idler) grid pair.

    values[j, k] is the amplitude at (grid_s.samples[j], grid_i.samples[k]).
    """

    grid_s: FrequencyGrid
    grid_i: FrequencyGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=complex)
        _check_field_shape(self.grid_s, self.grid_i, v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def l2_mass(self) -> float:
        """Trapezoidal integral of |values|^2 over both axes."""
        return float(
            np.trapezoid(
                np.trapezoid(np.abs(self.values) ** 2, dx=self.grid_i.spacing, axis=1),
                dx=self.grid_s.spacing,
            )
        )

    def normalize_l2(self) -> "ComplexField2D":
        mass = self.l2_mass()
        if mass <= 0.0:
            raise InvalidArgumentError("cannot L2-normalize a zero field")
        return ComplexField2D(self.grid_s, self.grid_i, self.values / np.sqrt(mass))

    def intensity(self) -> "RealField2D":
        return RealField2D(self.grid_s, self.grid_i, np.abs(self.values) ** 2)


@dataclass(frozen=True)
class RealField2D:
    """Non-negative real field (joint spectral intensity and friends)."""

    grid_s: FrequencyGrid
    grid_i: FrequencyGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        _check_field_shape(self.grid_s, self.grid_i, v)
        if v.size and float(v.min()) < 0.0:
            raise InvalidArgumentError("intensity field has negative entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def normalize_area(self) -> "RealField2D":
        total = integrate_2d(self)
        if total <= 0.0:
            raise InvalidArgumentError("cannot normalize a zero field")
        return RealField2D(self.grid_s, self.grid_i, self.values / total)


@dataclass(frozen=True)
class Spectrum1D:
    """Real-valued spectrum on a single frequency grid."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.shape[0] != self.grid.n_points:
            raise InvalidArgumentError(
                f"spectrum length {v.shape} does not match grid ({self.grid.n_points})"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("spectrum contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def area(self) -> float:
        return float(np.trapezoid(self.values, dx=self.grid.spacing))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def integrate_2d(field: RealField2D | ComplexField2D) -> float:
    """Trapezoidal integral over both axes.

    For a ComplexField2D this integrates the raw values (useful for linear
    checks); intensities should be integrated as field.intensity().
    """
    inner = np.trapezoid(field.values, dx=field.grid_i.spacing, axis=1)
    out = np.trapezoid(inner, dx=field.grid_s.spacing)
    return float(np.real_if_close(out)) if np.iscomplexobj(field.values) else float(out)


def marginal_spectrum(field: RealField2D, axis: str = "signal") -> Spectrum1D:
    """Integrate out one photon; returns the marginal on the other's grid.

    axis names the axis that is KEPT: "signal" integrates over the idler.
    """
    if axis == "signal":
        vals = np.trapezoid(field.values, dx=field.grid_i.spacing, axis=1)
        return Spectrum1D(field.grid_s, vals)
    if axis == "idler":
        vals = np.trapezoid(field.values, dx=field.grid_s.spacing, axis=0)
        return Spectrum1D(field.grid_i, vals)
    raise InvalidArgumentError(f"axis must be 'signal' or 'idler', got {axis!r}")


# ---------------------------------------------------------------------------
# Gaussian blur
# ---------------------------------------------------------------------------

def convolve_gaussian(spec: Spectrum1D, fwhm: float) -> Spectrum1D:
    """Convolve a spectrum with a normalized Gaussian of the given FWHM.

    The kernel is truncated at +/-5 sigma and renormalized to unit discrete
    sum, so the convolution conserves the integral of spectra that vanish
    near the grid edges.  fwhm = 0 is the identity.  The grid must resolve
    the kernel: spacing <= fwhm/4, otherwise the blur would be dominated by
    sampling error and we refuse.
    """
    if fwhm < 0.0:
        raise InvalidArgumentError(f"blur FWHM must be >= 0, got {fwhm}")
    if fwhm == 0.0:
        return Spectrum1D(spec.grid, spec.values.copy())
    h = spec.grid.spacing
    if h > fwhm / 4.0:
        raise ResolutionError(
            f"grid spacing {h:.4g} rad/s too coarse for blur FWHM {fwhm:.4g} rad/s "
            f"(need spacing <= fwhm/4 = {fwhm / 4.0:.4g})"
        )
    sigma = fwhm * FWHM_TO_SIGMA
    half = int(np.ceil(5.0 * sigma / h))
    offsets = np.arange(-half, half + 1) * h
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
    kernel /= kernel.sum()
    blurred = np.convolve(spec.values, kernel, mode="same")
    return Spectrum1D(spec.grid, blurred)
