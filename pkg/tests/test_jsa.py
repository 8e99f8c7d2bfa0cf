"""Joint-spectral-amplitude constructors: Gaussian and sinc phase matching."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfeq import (
    InvalidArgumentError,
    SpdcParams,
    TruncationError,
    build_jsa,
    gaussian_jsa,
    make_grid,
    marginal_spectrum,
    sinc_jsa,
)

from conftest import fwhm_of, params_scaled


def test_peak_sits_at_the_photon_centers():
    g = make_grid(50.0, 10.0, 257)  # odd n so the center is a sample
    f = build_jsa(params_scaled(0.5), g, g)
    j, k = np.unravel_index(np.argmax(np.abs(f.values)), f.values.shape)
    assert g.samples[j] == pytest.approx(50.0)
    assert g.samples[k] == pytest.approx(50.0)


def test_degenerate_amplitude_is_exchange_symmetric():
    g = make_grid(50.0, 10.0, 201)
    f = build_jsa(params_scaled(0.37), g, g)
    np.testing.assert_allclose(f.values, f.values.T, atol=1e-12)


def test_output_is_l2_normalized_and_positive():
    g = make_grid(50.0, 10.0, 301)
    f = build_jsa(params_scaled(0.5), g, g)
    assert f.l2_mass() == pytest.approx(1.0, abs=1e-10)
    assert np.all(f.values.real > 0.0)
    assert np.all(f.values.imag == 0.0)


def test_intensity_fwhm_along_difference_axis():
    g = make_grid(50.0, 10.0, 1001)
    f = build_jsa(params_scaled(1.0), g, g)
    # anti-diagonal through the center samples the difference axis: w- = 2x
    cut = np.abs(f.values[:, ::-1].diagonal()) ** 2
    w_minus = 2.0 * (g.samples - 50.0)
    assert fwhm_of(w_minus, cut) == pytest.approx(1.0, rel=0.01)


def test_pump_center_defaults_to_sum_of_photon_centers():
    p = params_scaled(0.3)
    assert p.pump_center == pytest.approx(100.0)
    g = make_grid(50.0, 10.0, 129)
    explicit = SpdcParams(50.0, 50.0, 0.3, 1.0, pump_center=100.0)
    np.testing.assert_array_equal(
        build_jsa(p, g, g).values, build_jsa(explicit, g, g).values
    )


def test_shifted_pump_splits_offset_evenly():
    p = params_scaled(0.3).shifted(0.8)
    assert p.omega_s0 == pytest.approx(50.4)
    assert p.omega_i0 == pytest.approx(50.4)
    assert p.pump_center == pytest.approx(100.8)


def test_nondegenerate_amplitude_is_asymmetric_somewhere():
    g = make_grid(55.0, 16.0, 257)
    f = build_jsa(SpdcParams(50.0, 60.0, 0.5, 1.0), g, g)
    peak = np.abs(f.values).max()
    assert np.abs(f.values - f.values.T).max() > 1e-3 * peak


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(omega_s0=0.0, omega_i0=50.0, pump_fwhm=0.5, single_photon_fwhm=1.0),
        dict(omega_s0=50.0, omega_i0=50.0, pump_fwhm=0.0, single_photon_fwhm=1.0),
        dict(omega_s0=50.0, omega_i0=50.0, pump_fwhm=0.5, single_photon_fwhm=-1.0),
        dict(omega_s0=50.0, omega_i0=50.0, pump_fwhm=0.5, single_photon_fwhm=1.0, model="lorentzian"),
    ],
)
def test_parameter_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        SpdcParams(**kwargs)


def test_grid_that_misses_the_photon_band_is_rejected():
    g = make_grid(50.0, 3.0, 65)  # covers +/- 1.5 bandwidths only
    with pytest.raises(InvalidArgumentError):
        build_jsa(params_scaled(0.5), g, g)


def test_truncating_grid_is_rejected():
    # wide pump: the sum-axis ridge spills past a grid that still covers
    # both photon bands, so the mass check fires rather than the band check
    g = make_grid(50.0, 4.4, 129)
    with pytest.raises(TruncationError):
        build_jsa(SpdcParams(50.0, 50.0, 4.0, 1.0), g, g)


@settings(deadline=None, max_examples=20)
@given(delta=st.floats(-40.0, 150.0), rho=st.floats(0.1, 1.0))
def test_relabeling_invariance(delta, rho):
    # shifting every frequency label by the same amount changes nothing
    base = make_grid(50.0, 10.0, 65)
    moved = make_grid(50.0 + delta, 10.0, 65)
    f0 = build_jsa(params_scaled(rho), base, base)
    f1 = build_jsa(params_scaled(rho, center=50.0 + delta), moved, moved)
    np.testing.assert_allclose(f1.values, f0.values, atol=1e-12)


# ------------------------------------------------------------------- sinc


SINC_CENTER = 40.0
SINC_RHO = 1.0 / 20.0


@pytest.fixture(scope="module")
def sinc_field():
    g = make_grid(SINC_CENTER, 64.0, 2049)
    return build_jsa(params_scaled(SINC_RHO, center=SINC_CENTER, model="sinc"), g, g)


def test_sinc_ridge_dominates_every_antidiagonal(sinc_field):
    v = np.abs(sinc_field.values)
    n = v.shape[0]
    for s in range(n // 2 - 200, n // 2 + 201, 25):
        j = np.arange(max(0, 2 * s - n + 1), min(n, 2 * s + 1))
        anti = v[j, 2 * s - j]
        assert anti.max() == pytest.approx(v[s, s], rel=1e-12)


def test_sinc_first_zero_with_sign_change(sinc_field):
    g = sinc_field.grid_s
    cut = sinc_field.values[:, ::-1].diagonal().real
    w_minus = 2.0 * (g.samples - SINC_CENTER)
    pos = w_minus > 0
    sign_flips = np.flatnonzero(np.diff(np.sign(cut[pos])) != 0)
    assert sign_flips.size > 0  # amplitude really does change sign
    i = np.flatnonzero(pos)[0] + sign_flips[0]
    # linear interpolation of the crossing
    x0, x1 = w_minus[i], w_minus[i + 1]
    y0, y1 = cut[i], cut[i + 1]
    zero = x0 - y0 * (x1 - x0) / (y1 - y0)
    assert abs(zero - math.pi) <= 2.0 * g.spacing
    assert zero == pytest.approx(math.pi, rel=1e-3)


def test_sinc_marginal_has_sidebands(sinc_field):
    spec = marginal_spectrum(sinc_field.intensity())
    y = spec.values / spec.values.max()
    peak = int(np.argmax(y))
    # walk right: first dip, then the first sideband summit
    i = peak
    while y[i + 1] <= y[i]:
        i += 1
    dip = i
    while y[i + 1] >= y[i]:
        i += 1
    assert y[dip] < y[i]
    assert y[i] >= 0.04
    assert y[i] == pytest.approx(0.047, abs=0.01)


def test_model_dispatch_matches_direct_constructors():
    g = make_grid(50.0, 12.0, 129)
    p_g = params_scaled(0.5)
    np.testing.assert_array_equal(build_jsa(p_g, g, g).values, gaussian_jsa(p_g, g, g).values)
    g2 = make_grid(SINC_CENTER, 64.0, 513)
    p_s = params_scaled(0.25, center=SINC_CENTER, model="sinc")
    np.testing.assert_array_equal(build_jsa(p_s, g2, g2).values, sinc_jsa(p_s, g2, g2).values)
