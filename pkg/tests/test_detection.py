"""Dispersive time-of-flight mapping, jitter budget, and count synthesis."""

import math

import numpy as np
import pytest

from hfeq import InvalidArgumentError, RangeError, ResolutionError, Spectrum1D, make_grid
from hfeq.detection import (
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
from hfeq.units import C_LIGHT, TWO_PI, ghz_to_rads, wavelength_nm_to_omega

SLOPE = -1.58597  # ns/nm
INTERCEPT = 2458.26  # ns
JITTER = 49.1e-12  # s


@pytest.fixture(scope="module")
def cal():
    return TofsCalibration(slope_ns_per_nm=SLOPE, intercept_ns=INTERCEPT, jitter_fwhm=JITTER)


@pytest.fixture(scope="module")
def lab_spectrum():
    w0 = wavelength_nm_to_omega(1550.0)
    dws = ghz_to_rads(300.0)
    g = make_grid(w0, 5.0 * dws, 2048)
    vals = np.exp(-4.0 * math.log(2.0) * ((g.samples - w0) / dws) ** 2)
    return Spectrum1D(g, vals)


# ------------------------------------------------------------- calibration


def test_reference_wavelength_lands_at_the_calibrated_time(cal):
    assert tofs_time(1550.0, cal) == pytest.approx(0.0065, abs=1e-6)


def test_one_bin_of_wavelength_is_about_a_nanosecond(cal):
    # 0.652 nm is the wavelength pitch of 81.43 GHz teeth at 1550 nm
    dt = abs(tofs_time(1550.326, cal) - tofs_time(1549.674, cal))
    assert dt == pytest.approx(1.034, rel=1e-3)


def test_longer_wavelengths_arrive_earlier(cal):
    assert tofs_time(1551.0, cal) < tofs_time(1550.0, cal)
    # and therefore arrival time increases with angular frequency
    w = wavelength_nm_to_omega(1550.0)
    assert time_from_omega(w + 1e12, cal) > time_from_omega(w, cal)


def test_wavelength_time_roundtrip(cal):
    for lam in (1541.0, 1550.0, 1559.5):
        assert tofs_wavelength(tofs_time(lam, cal), cal) == pytest.approx(lam, abs=1e-9)


def test_omega_time_roundtrip(cal):
    w = wavelength_nm_to_omega(1547.0)
    assert omega_from_time(time_from_omega(w, cal), cal) == pytest.approx(w, rel=1e-12)


def test_out_of_band_wavelength_is_rejected(cal):
    with pytest.raises(RangeError):
        tofs_time(1530.0, cal)
    with pytest.raises(RangeError):
        tofs_wavelength(tofs_time(1559.0, cal) + SLOPE * 5.0, cal)


def test_calibration_validation():
    with pytest.raises(InvalidArgumentError):
        TofsCalibration(slope_ns_per_nm=0.0, intercept_ns=1.0)
    with pytest.raises(InvalidArgumentError):
        TofsCalibration(slope_ns_per_nm=-1.0, intercept_ns=1.0, jitter_fwhm=-1e-12)
    with pytest.raises(InvalidArgumentError):
        TofsCalibration(slope_ns_per_nm=-1.0, intercept_ns=1.0, band_nm=(1560.0, 1540.0))


# ------------------------------------------------------------ jitter chain


def test_jitter_maps_to_the_expected_wavelength_resolution(cal):
    dlam_pm = (cal.jitter_fwhm * 1e9) / abs(cal.slope_ns_per_nm) * 1e3
    assert dlam_pm == pytest.approx(31.0, abs=0.5)


def test_jitter_maps_to_the_expected_frequency_blur(cal):
    f_ghz = jitter_fwhm_omega(cal, 1550.0) / TWO_PI / 1e9
    assert f_ghz == pytest.approx(3.87, abs=0.1)
    # consistency with the hand chain jitter -> d lambda -> c/lambda^2
    dlam = (cal.jitter_fwhm * 1e9) / abs(cal.slope_ns_per_nm) * 1e-9
    assert f_ghz == pytest.approx(C_LIGHT * dlam / 1550e-9**2 / 1e9, rel=0.02)


def test_zero_jitter_calibration_blurs_nothing():
    assert jitter_fwhm_omega(
        TofsCalibration(slope_ns_per_nm=SLOPE, intercept_ns=INTERCEPT, jitter_fwhm=0.0), 1550.0
    ) == pytest.approx(0.0, abs=0.0)


# --------------------------------------------------------- count synthesis


def test_counts_are_bitwise_reproducible_per_seed(cal, lab_spectrum):
    a = synthesize_counts(lab_spectrum, cal, NoiseModel(0.0, 1e5, rng_seed=7))
    b = synthesize_counts(lab_spectrum, cal, NoiseModel(0.0, 1e5, rng_seed=7))
    c = synthesize_counts(lab_spectrum, cal, NoiseModel(0.0, 1e5, rng_seed=8))
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.bin_edges, b.bin_edges)
    assert not np.array_equal(a.counts, c.counts)


def test_total_counts_track_the_signal_budget(cal, lab_spectrum):
    h = synthesize_counts(lab_spectrum, cal, NoiseModel(0.0, 1e6, rng_seed=7))
    assert h.counts.sum() / 1e6 == pytest.approx(1.0, abs=0.005)
    assert h.unit == "s"
    assert np.all(np.diff(h.bin_edges) > 0.0)
    assert h.counts.size == lab_spectrum.grid.n_points


def test_count_centroid_lands_on_the_mapped_peak(cal, lab_spectrum):
    h = synthesize_counts(lab_spectrum, cal, NoiseModel(2.0, 5e4, rng_seed=11))
    centroid = float(np.sum(h.centers * h.counts) / h.counts.sum())
    t_peak = float(time_from_omega(lab_spectrum.grid.center, cal)) * 1e-9
    assert abs(centroid - t_peak) < 20e-12  # well inside the 3.8 ns envelope


def test_count_variance_is_poissonian_across_seeds(cal, lab_spectrum):
    totals = np.array(
        [
            synthesize_counts(lab_spectrum, cal, NoiseModel(0.0, 1e4, rng_seed=s)).counts.sum()
            for s in range(200)
        ],
        dtype=float,
    )
    assert totals.mean() / 1e4 == pytest.approx(1.0, abs=0.02)
    assert totals.var(ddof=1) / 1e4 == pytest.approx(1.0, abs=0.15)


def test_flat_background_bins_are_poissonian(cal, lab_spectrum):
    reps = np.array(
        [
            synthesize_counts(lab_spectrum, cal, NoiseModel(20.0, 0.0, rng_seed=s)).counts
            for s in range(200)
        ],
        dtype=float,
    )
    assert reps.mean() / 20.0 == pytest.approx(1.0, abs=0.01)
    assert reps.var(axis=0, ddof=1).mean() / 20.0 == pytest.approx(1.0, abs=0.1)


def test_under_resolved_time_binning_is_rejected(cal):
    w0 = wavelength_nm_to_omega(1550.0)
    dws = ghz_to_rads(300.0)
    g = make_grid(w0, 5.0 * dws, 256)  # ~74 ps per bin vs 49.1 ps jitter
    spec = Spectrum1D(g, np.exp(-4.0 * math.log(2.0) * ((g.samples - w0) / dws) ** 2))
    with pytest.raises(ResolutionError):
        synthesize_counts(spec, cal, NoiseModel(0.0, 1e4, rng_seed=0))


def test_spectrum_wider_than_the_calibrated_band_is_rejected(cal):
    w0 = wavelength_nm_to_omega(1550.0)
    dws = ghz_to_rads(300.0)
    g = make_grid(w0, 12.0 * dws, 2048)  # ~29 nm of wavelength
    spec = Spectrum1D(g, np.exp(-4.0 * math.log(2.0) * ((g.samples - w0) / dws) ** 2))
    with pytest.raises(RangeError):
        synthesize_counts(spec, cal, NoiseModel(0.0, 1e4, rng_seed=0))


def test_noise_model_validation():
    with pytest.raises(InvalidArgumentError):
        NoiseModel(-1.0, 1.0, 0)
    with pytest.raises(InvalidArgumentError):
        NoiseModel(1.0, -1.0, 0)
    with pytest.raises(InvalidArgumentError):
        NoiseModel(1.0, 1.0, 2**64)


def test_histogram_validation():
    e = np.array([0.0, 1.0, 2.0])
    with pytest.raises(InvalidArgumentError):
        CountHistogram(e, np.array([1.0, 2.0]))  # non-integer
    with pytest.raises(InvalidArgumentError):
        CountHistogram(e, np.array([1, -2]))
    with pytest.raises(InvalidArgumentError):
        CountHistogram(np.array([0.0, 2.0, 1.0]), np.array([1, 2]))
    with pytest.raises(InvalidArgumentError):
        CountHistogram(e, np.array([1, 2, 3]))


# ------------------------------------------- unit conversion and subtraction


def test_time_histogram_converts_to_frequency(cal, lab_spectrum):
    h = synthesize_counts(lab_spectrum, cal, NoiseModel(0.0, 1e5, rng_seed=5))
    hf = histogram_to_frequency(h, cal)
    assert hf.unit == "rad/s"
    assert np.array_equal(hf.counts, h.counts)
    assert np.all(np.diff(hf.bin_edges) > 0.0)
    w0 = lab_spectrum.grid.center
    dws = ghz_to_rads(300.0)
    centroid = float(np.sum(hf.centers * hf.counts) / hf.counts.sum())
    assert abs(centroid - w0) < 0.05 * dws
    with pytest.raises(InvalidArgumentError):
        histogram_to_frequency(hf, cal)  # already in frequency


def test_background_subtraction_algebra(cal, lab_spectrum):
    h = synthesize_counts(lab_spectrum, cal, NoiseModel(5.0, 1e5, rng_seed=3))
    sub = subtract_background(h, 5.0)
    assert sub.unit == h.unit
    assert float(sub.values.min()) >= 0.0
    expected = np.maximum(h.counts.astype(float) - 5.0, 0.0)
    assert np.array_equal(sub.values, expected)
    identity = subtract_background(h, 0.0)
    assert np.array_equal(identity.values, h.counts.astype(float))
    with pytest.raises(InvalidArgumentError):
        subtract_background(h, -1.0)


def test_csv_round_trip(cal, lab_spectrum, tmp_path):
    h = synthesize_counts(lab_spectrum, cal, NoiseModel(2.0, 5e4, rng_seed=11))
    path = tmp_path / "hist.csv"
    write_histogram_csv(h, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "bin_lo[s],bin_hi[s],count"
    assert len(lines) - 1 == h.counts.size
    lo, hi, c = lines[1].split(",")
    assert float(lo) == pytest.approx(h.bin_edges[0], rel=1e-9)
    assert float(hi) == pytest.approx(h.bin_edges[1], rel=1e-9)
    assert int(c) == h.counts[0]
    # subtracted histograms serialize real values
    sub = subtract_background(h, 2.0)
    path2 = tmp_path / "sub.csv"
    write_histogram_csv(sub, path2)
    first = path2.read_text(encoding="utf-8").splitlines()[1].split(",")
    assert float(first[2]) == pytest.approx(sub.values[0], rel=1e-9)
