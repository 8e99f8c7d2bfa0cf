"""Shared fixtures and helpers for the test suite.

Most physics tests run in scaled units: the single-photon bandwidth is 1 rad/s,
delays are measured in units of its inverse, and grids are centered on zero
detuning.  Lab-unit tests (GHz/ps/nm) say so explicitly.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from hfeq import (
    InterferometerConfig,
    SpdcParams,
    build_jsa,
    make_grid,
    marginal_spectrum,
    tpes_jsa,
)

LN2 = math.log(2.0)
TWO_PI = 2.0 * math.pi


def params_scaled(rho: float, *, center: float = 50.0, model: str = "gaussian") -> SpdcParams:
    """Degenerate SPDC parameters with unit single-photon bandwidth."""
    return SpdcParams(
        omega_s0=center,
        omega_i0=center,
        pump_fwhm=rho,
        single_photon_fwhm=1.0,
        model=model,
    )


def comb_field(rho: float, tau: float, *, n: int = 512, span: float = 12.0, center: float = 50.0):
    """TPES amplitude of a degenerate Gaussian comb (tau_F = 0)."""
    grid = make_grid(center, span, n)
    jsa = build_jsa(params_scaled(rho, center=center), grid, grid)
    cfg = InterferometerConfig(tau_H=tau, tau_F=0.0)
    return tpes_jsa(jsa, cfg)


def comb_and_reference(rho: float, tau: float, *, n: int = 512, span: float = 12.0, center: float = 50.0):
    """Comb marginal plus the bare SPDC marginal on the same grid."""
    grid = make_grid(center, span, n)
    jsa = build_jsa(params_scaled(rho), grid, grid)
    comb = tpes_jsa(jsa, InterferometerConfig(tau_H=tau, tau_F=0.0))
    return marginal_spectrum(comb.intensity()), marginal_spectrum(jsa.intensity())


def fwhm_of(x: np.ndarray, y: np.ndarray) -> float:
    """Full width at half maximum via linear interpolation of the crossings."""
    y = np.asarray(y, dtype=float)
    half = 0.5 * float(y.max())
    above = y >= half
    idx = np.flatnonzero(above)
    if idx.size < 2:
        raise ValueError("curve never reaches half maximum on both sides")
    lo, hi = idx[0], idx[-1]
    if lo == 0 or hi == y.size - 1:
        raise ValueError("half-maximum crossing clipped by the grid")

    def cross(i0: int, i1: int) -> float:
        f = (half - y[i0]) / (y[i1] - y[i0])
        return x[i0] + f * (x[i1] - x[i0])

    return cross(hi, hi + 1) - cross(lo, lo - 1)


@pytest.fixture(scope="session")
def warmed_up() -> None:
    """Touch the hot numpy paths once so timed tests don't pay first-call cost."""
    grid = make_grid(50.0, 8.0, 64)
    jsa = build_jsa(params_scaled(0.5), grid, grid)
    tpes_jsa(jsa, InterferometerConfig(tau_H=1.0, tau_F=0.0))
    np.linalg.svd(np.eye(8))
