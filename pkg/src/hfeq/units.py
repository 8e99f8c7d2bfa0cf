"""Unit conventions and conversions.

Internally everything runs in SI: angular frequency in rad/s, time in
seconds, length in meters.  Human-facing boundaries (config files, CLI,
reports) speak GHz, ps, ns and nm; these helpers convert exactly once at
that boundary.

All spectral widths in this package are intensity FWHMs unless a name says
otherwise.
"""

from __future__ import annotations

import math

# Vacuum speed of light, m/s (exact by SI definition).
C_LIGHT = 299_792_458.0

TWO_PI = 2.0 * math.pi
LN2 = math.log(2.0)

# Gaussian FWHM = FWHM_TO_SIGMA**-1 * sigma ... i.e. sigma = fwhm * FWHM_TO_SIGMA
FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * LN2))


def ghz_to_rads(f_ghz: float) -> float:
    """Ordinary frequency in GHz -> angular frequency in rad/s."""
    return TWO_PI * f_ghz * 1e9


def rads_to_ghz(omega: float) -> float:
    """Angular frequency in rad/s -> ordinary frequency in GHz."""
    return omega / (TWO_PI * 1e9)


def ps_to_s(t_ps: float) -> float:
    return t_ps * 1e-12


def s_to_ps(t_s: float) -> float:
    return t_s * 1e12


def ns_to_s(t_ns: float) -> float:
    return t_ns * 1e-9


def s_to_ns(t_s: float) -> float:
    return t_s * 1e9


def wavelength_nm_to_omega(lambda_nm: float) -> float:
    """Vacuum wavelength in nm -> angular frequency in rad/s."""
    return TWO_PI * C_LIGHT / (lambda_nm * 1e-9)


def omega_to_wavelength_nm(omega: float) -> float:
    """Angular frequency in rad/s -> vacuum wavelength in nm."""
    return TWO_PI * C_LIGHT / omega * 1e9
