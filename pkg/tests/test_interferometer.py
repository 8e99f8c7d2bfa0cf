"""HOM + Franson interferometer: TPES amplitudes, satellites, fringe scans."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfeq import (
    InterferometerConfig,
    InvalidArgumentError,
    ResolutionError,
    SpdcParams,
    build_jsa,
    coincidence_probability,
    default_scan_grid,
    fit_fringe,
    fringe_scan,
    make_grid,
    satellite_jsi,
    tpes_jsa,
)
from hfeq.grids import RealField2D

from conftest import LN2, TWO_PI, params_scaled


# ---------------------------------------------------------------- config


def test_negative_hom_delay_normalizes_to_mirror():
    cfg = InterferometerConfig(tau_H=-2.0, tau_F=0.0)
    assert cfg.tau_H == 2.0
    assert cfg.mirror is True


def test_arm_times_must_come_in_pairs():
    with pytest.raises(InvalidArgumentError):
        InterferometerConfig(tau_H=1.0, tau_long=5.0)


def test_arm_times_fix_tau_f():
    cfg = InterferometerConfig(tau_H=1.0, tau_long=7.5, tau_short=2.5)
    assert cfg.tau_F == pytest.approx(5.0)
    with pytest.raises(InvalidArgumentError):
        InterferometerConfig(tau_H=1.0, tau_F=4.0, tau_long=7.5, tau_short=2.5)


def test_with_tau_f_returns_updated_copy():
    cfg = InterferometerConfig(tau_H=1.0, tau_F=2.0)
    assert cfg.with_tau_f(3.0).tau_F == 3.0
    assert cfg.tau_F == 2.0


@settings(deadline=None, max_examples=20)
@given(
    shift=st.floats(-100.0, 100.0),
    tau_s=st.floats(0.5, 4.0),
    tau_f=st.floats(1.0, 8.0),
)
def test_only_arm_difference_matters(shift, tau_s, tau_f):
    # (tau_long, tau_short) -> (tau_long + c, tau_short + c) changes nothing
    g = make_grid(50.0, 10.0, 129)
    f = build_jsa(params_scaled(0.5), g, g)
    a = InterferometerConfig(tau_H=1.5, tau_long=tau_s + tau_f, tau_short=tau_s)
    b = InterferometerConfig(
        tau_H=1.5, tau_long=tau_s + tau_f + shift, tau_short=tau_s + shift
    )
    ja = tpes_jsa(f, a).intensity().values
    jb = tpes_jsa(f, b).intensity().values
    np.testing.assert_allclose(jb, ja, atol=1e-12 * ja.max())


# ------------------------------------------------------------------ tpes


def test_zero_delays_return_the_input_amplitude():
    g = make_grid(50.0, 10.0, 257)
    f = build_jsa(params_scaled(0.5), g, g)
    out = tpes_jsa(f, InterferometerConfig(tau_H=0.0, tau_F=0.0))
    np.testing.assert_allclose(out.values, f.values, atol=1e-10 * np.abs(f.values).max())


def test_exchange_and_product_forms_agree_for_degenerate_input():
    g = make_grid(50.0, 12.0, 512)
    f = build_jsa(params_scaled(0.25), g, g)
    cfg = InterferometerConfig(tau_H=3.0, tau_F=7.0)
    ex = tpes_jsa(f, cfg, form="exchange")
    pr = tpes_jsa(f, cfg, form="product")
    # intensities agree pointwise
    np.testing.assert_allclose(
        ex.intensity().values, pr.intensity().values, atol=1e-10 * ex.intensity().values.max()
    )
    # amplitudes agree once the product form carries the linking phase
    ws = g.samples[:, None]
    wi = g.samples[None, :]
    linked = pr.values * np.exp(-0.5j * (ws - wi) * cfg.tau_H)
    np.testing.assert_allclose(linked, ex.values, atol=1e-10 * np.abs(ex.values).max())


def test_output_vanishes_on_franson_zero_lines():
    g = make_grid(50.0, 12.0, 512)
    f = build_jsa(params_scaled(0.5), g, g)
    tau_f = 8.0
    jsi = tpes_jsa(f, InterferometerConfig(tau_H=0.0, tau_F=tau_f)).intensity().values
    bare = f.intensity().values

    wsum = g.samples[:, None] + g.samples[None, :]
    pitch = TWO_PI / tau_f
    # distance to the nearest odd multiple of pi/tau_F
    dist = np.abs((wsum - math.pi / tau_f + 0.5 * pitch) % pitch - 0.5 * pitch)
    mask = (dist <= 0.4 * g.spacing) & (bare > 1e-6 * bare.max())
    assert np.count_nonzero(mask) > 100
    assert np.max(jsi[mask] / bare[mask]) < 1e-3


def test_comb_marginal_shows_five_dominant_lobes():
    g = make_grid(50.0, 12.0, 512)
    f = build_jsa(params_scaled(1.0 / 20.0), g, g)
    jsi = tpes_jsa(f, InterferometerConfig(tau_H=12.0, tau_F=0.0)).intensity()
    y = jsi.values.sum(axis=1)
    y /= y.max()
    interior = (y[1:-1] >= y[:-2]) & (y[1:-1] > y[2:]) & (y[1:-1] >= 0.05)
    assert int(np.count_nonzero(interior)) == 5


def test_non_square_grid_rejected():
    gs = make_grid(50.0, 10.0, 65)
    gi = make_grid(50.0, 10.0, 64)
    f_vals = np.ones((65, 64), dtype=complex)
    field = __import__("hfeq").grids.ComplexField2D(gs, gi, f_vals)
    with pytest.raises(InvalidArgumentError):
        tpes_jsa(field, InterferometerConfig(tau_H=1.0, tau_F=0.0))


def test_nyquist_guard_fires_on_coarse_grids():
    g = make_grid(50.0, 10.0, 33)  # spacing 0.3125
    f = build_jsa(params_scaled(0.5), g, g)
    with pytest.raises(ResolutionError):
        tpes_jsa(f, InterferometerConfig(tau_H=40.0, tau_F=0.0))


# ------------------------------------------------------------- satellites


def test_satellite_vanishes_for_symmetric_input_at_zero_delay():
    g = make_grid(50.0, 10.0, 257)
    f = build_jsa(params_scaled(0.5), g, g)
    sat = satellite_jsi(f, 0.0)
    assert sat.values.max() <= 1e-20 * f.intensity().values.max()


def test_satellite_zero_lines_on_the_difference_axis():
    g = make_grid(50.0, 12.0, 512)
    f = build_jsa(params_scaled(0.5), g, g)
    tau_h = 6.0
    sat = satellite_jsi(f, tau_h).values
    bare = f.intensity().values
    wdiff = g.samples[:, None] - g.samples[None, :]
    pitch = TWO_PI / tau_h
    dist = np.abs((wdiff + 0.5 * pitch) % pitch - 0.5 * pitch)
    mask = (dist <= 0.4 * g.spacing) & (bare > 1e-6 * bare.max())
    assert np.count_nonzero(mask) > 50
    assert np.max(sat[mask] / bare[mask]) < 1e-3


def test_far_detuned_pair_keeps_full_satellite_weight():
    # photres 10 bandwidths apart: exchange overlap gone, no interference
    g = make_grid(55.0, 26.0, 801)
    f = build_jsa(SpdcParams(50.0, 60.0, 0.5, 1.0), g, g)
    sat = coincidence_probability(satellite_jsi(f, 0.0))
    assert sat >= 0.9 * 0.125 * f.l2_mass()


# ------------------------------------------------- coincidence probability


def test_constructive_peak_is_unity_for_normalized_input():
    g = make_grid(50.0, 10.0, 513)
    f = build_jsa(params_scaled(0.5), g, g)
    jsi = tpes_jsa(f, InterferometerConfig(tau_H=0.0, tau_F=0.0)).intensity()
    assert coincidence_probability(jsi) == pytest.approx(1.0, abs=1e-6)


def test_probability_is_linear_in_the_intensity():
    g = make_grid(50.0, 8.0, 129)
    jsi = build_jsa(params_scaled(0.5), g, g).intensity()
    p = coincidence_probability(jsi)
    scaled = RealField2D(g, g, 3.25 * jsi.values)
    assert coincidence_probability(scaled) == pytest.approx(3.25 * p, rel=1e-12)


def test_narrowband_franson_null():
    # pump phase pi at the fringe carrier: CW-limit destructive point
    w0 = 50.0
    g = make_grid(w0, 6.0, 2401)
    f = build_jsa(params_scaled(1.0 / 200.0, center=w0), g, g)
    peak = coincidence_probability(
        tpes_jsa(f, InterferometerConfig(tau_H=0.0, tau_F=0.0)).intensity()
    )
    tau_f = math.pi / (2.0 * w0)
    null = coincidence_probability(
        tpes_jsa(f, InterferometerConfig(tau_H=0.0, tau_F=tau_f)).intensity()
    )
    assert null / peak <= 1e-3


def test_energy_bookkeeping_over_one_fringe():
    # TPES averaged over a full Franson fringe plus both satellites carries
    # half the input mass; the other half exits the unused port
    w0 = 200.0
    g = make_grid(w0, 10.0, 513)
    f = build_jsa(params_scaled(0.4, center=w0), g, g)
    tau_h = 3.0
    period = TWO_PI / (2.0 * w0)
    taus = 5.0 + period * np.arange(16) / 16.0
    avg = float(
        np.mean(
            [
                coincidence_probability(
                    tpes_jsa(f, InterferometerConfig(tau_H=tau_h, tau_F=tf)).intensity()
                )
                for tf in taus
            ]
        )
    )
    sat = coincidence_probability(satellite_jsi(f, tau_h))
    assert avg + 2.0 * sat == pytest.approx(0.5 * f.l2_mass(), rel=0.01)


# ------------------------------------------------------------ fringe scans


FRANSON_TAU = 20.0  # in units of the inverse photon bandwidth


def franson_visibility(rho: float) -> float:
    w0 = 50.0
    grid = make_grid(w0, 5.0, 1024)
    period = TWO_PI / (2.0 * w0)
    taus = FRANSON_TAU + 2.0 * period * np.arange(64) / 64.0
    scan = fringe_scan(
        SpdcParams(w0, w0, rho, 1.0),
        InterferometerConfig(tau_H=0.0, tau_F=FRANSON_TAU),
        taus,
        grid=grid,
    )
    assert scan.mode == "delay_scan"
    assert np.all(scan.probabilities >= 0.0)
    return fit_fringe(scan).parameters["visibility"]


def test_narrowband_fringe_visibility_follows_the_pump_envelope():
    v = franson_visibility(1.0 / 20.0)
    analytic = math.exp(-((1.0 / 20.0) ** 2) * FRANSON_TAU**2 / (16.0 * LN2))
    assert v == pytest.approx(analytic, abs=0.01)


def test_broadband_fringe_visibility_collapses():
    assert franson_visibility(1.0) <= 0.2


def test_pump_scan_period_matches_the_arm_imbalance():
    w0 = 50.0
    tau_f = 40.0
    grid = make_grid(w0, 5.0, 512)
    offsets = np.linspace(0.0, 2.0 * TWO_PI / tau_f, 48)
    scan = fringe_scan(
        SpdcParams(w0, w0, 1.0 / 20.0, 1.0),
        InterferometerConfig(tau_H=0.0, tau_F=tau_f, phase_mode="pump_scan"),
        offsets,
        grid=grid,
    )
    assert scan.mode == "pump_scan"
    carrier = fit_fringe(scan).parameters["carrier"]
    assert carrier == pytest.approx(tau_f, rel=0.02)


def test_scan_grid_guard():
    grid = make_grid(50.0, 10.0, 64)  # spacing 0.159
    taus = np.linspace(30.0, 31.0, 8)
    with pytest.raises(ResolutionError):
        fringe_scan(
            params_scaled(0.5),
            InterferometerConfig(tau_H=0.0, tau_F=30.0),
            taus,
            grid=grid,
        )


def test_default_scan_grid_resolves_the_requested_delay():
    p = params_scaled(1.0 / 20.0)
    cfg = InterferometerConfig(tau_H=0.0, tau_F=10.0)
    g = default_scan_grid(p, cfg, max_tau_f=20.0)
    assert g.spacing <= math.pi / (4.0 * 10.0)
    assert g.n_points <= 4096
    # and it is actually usable end to end
    scan = fringe_scan(p, cfg, [10.0, 10.1], grid=g)
    assert len(scan.probabilities) == 2
