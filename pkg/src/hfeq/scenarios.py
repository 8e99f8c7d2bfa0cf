"""Named end-to-end runs with deterministic file products.

Each scenario bundles a source model, an instrument configuration, and the
analysis that belongs with it, then writes CSV data, SVG plots, and fit
reports plus a manifest.json echoing every resolved parameter.  Parameters
cross this boundary in lab units — GHz, nm, ps, counts — and are converted
to rad/s and seconds exactly once, here.

Scenarios can also be launched from a TOML file::

    scenario = "hom-comb-fit"
    seed = 7
    [params]
    tau_h_ps = 8.27

Unknown keys are rejected (with the offending line), not ignored: a typo in
a parameter name must never silently fall back to a default.

Everything written is byte-reproducible: no timestamps, no machine info,
fixed float formatting, and counting noise drawn from per-bin counter-based
streams keyed by the seed.
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10 fallback
    import tomli as tomllib

from . import svgplot
from .detection import (
    CountHistogram,
    NoiseModel,
    TofsCalibration,
    histogram_to_frequency,
    subtract_background,
    synthesize_counts,
    write_histogram_csv,
)
from .errors import ConfigError
from .fits import fit_comb, fit_fringe
from .grids import convolve_gaussian, integrate_2d, make_grid
from .interferometer import (
    FringeScan,
    InterferometerConfig,
    coincidence_probability,
    fringe_scan,
    satellite_jsi,
    tpes_jsa,
)
from .jsa import SpdcParams, build_jsa
from .metrics import (
    estimate_dimension,
    extract_bin,
    hom_visibility,
    kf_curve,
    kf_from_visibility,
    schmidt_number,
    single_mode_spectrum,
)
from .units import (
    LN2,
    TWO_PI,
    ghz_to_rads,
    ns_to_s,
    ps_to_s,
    rads_to_ghz,
    s_to_ps,
    wavelength_nm_to_omega,
)

__all__ = [
    "Scenario",
    "get_scenario",
    "list_scenarios",
    "load_config",
    "run_scenario",
    "locate_intensity_maxima",
    "lattice_residue",
]


# ---------------------------------------------------------------------------
# catalog plumbing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """A runnable catalog entry.

    defaults carries every accepted parameter with its default value — it
    doubles as the validation schema for TOML overrides.  grid_points is the
    default working-grid size; the CLI may override it.
    """

    name: str
    description: str
    outputs: tuple
    defaults: dict
    grid_points: int
    uses_rng: bool = False


_CATALOG: dict = {}
_BUILDERS: dict = {}


def _scenario(name, description, outputs, defaults, grid_points, uses_rng=False):
    def register(fn):
        _CATALOG[name] = Scenario(
            name=name,
            description=description,
            outputs=tuple(outputs),
            defaults=dict(defaults),
            grid_points=grid_points,
            uses_rng=uses_rng,
        )
        _BUILDERS[name] = fn
        return fn

    return register


def list_scenarios() -> list:
    return [_CATALOG[k] for k in sorted(_CATALOG)]


def get_scenario(name: str) -> Scenario:
    try:
        return _CATALOG[name]
    except KeyError:
        known = ", ".join(sorted(_CATALOG))
        raise ConfigError(f"unknown scenario {name!r}; available: {known}") from None


# ---------------------------------------------------------------------------
# run context: file products + report accumulation
# ---------------------------------------------------------------------------

class _Run:
    """Holds resolved parameters and collects the files one run produces."""

    def __init__(self, scenario, params, grid_n, seed, out_dir):
        self.scenario = scenario
        self.p = params
        self.n = int(grid_n)
        self.seed = int(seed)
        self.out = out_dir
        self.files: list = []
        self.report: dict = {}

    def path(self, name):
        return os.path.join(self.out, name)

    def _record(self, name, kind):
        self.files.append({"file": name, "kind": kind})

    def csv(self, name, kind, header, columns):
        cols = [np.asarray(c, dtype=float) for c in columns]
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in zip(*cols):
                fh.write(",".join(f"{v:.12g}" for v in row) + "\n")
        self._record(name, kind)

    def field_csv(self, name, kind, field2d, stride=1):
        """Flat (omega_s, omega_i, value) dump, optionally decimated."""
        ws = field2d.grid_s.samples[::stride]
        wi = field2d.grid_i.samples[::stride]
        z = np.asarray(field2d.values)[::stride, ::stride]
        if np.iscomplexobj(z):
            z = np.abs(z) ** 2
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("omega_s_ghz,omega_i_ghz,value\n")
            for i, wsv in enumerate(ws):
                sg = rads_to_ghz(wsv)
                for j, wiv in enumerate(wi):
                    fh.write(f"{sg:.12g},{rads_to_ghz(wiv):.12g},{z[i, j]:.12g}\n")
        self._record(name, kind)

    def heatmap(self, name, field2d, title, center=None):
        z = np.asarray(field2d.values)
        if np.iscomplexobj(z):
            z = np.abs(z) ** 2
        c_s = field2d.grid_s.center if center is None else center
        c_i = field2d.grid_i.center if center is None else center
        xs = rads_to_ghz(field2d.grid_i.samples - c_i)
        ys = rads_to_ghz(field2d.grid_s.samples - c_s)
        svgplot.heatmap(
            self.path(name),
            xs,
            ys,
            z,
            title=title,
            xlabel="idler detuning [GHz]",
            ylabel="signal detuning [GHz]",
        )
        self._record(name, "jsi")

    def line(self, name, kind, x, series, title, xlabel, ylabel):
        svgplot.line_plot(
            self.path(name), x, series, title=title, xlabel=xlabel, ylabel=ylabel
        )
        self._record(name, kind)

    def hist_csv(self, name, hist):
        write_histogram_csv(hist, self.path(name))
        self._record(name, "histogram")

    def fit_json(self, name, result, extra=None):
        payload = {
            "parameters": result.to_report(),
            "converged": bool(result.converged),
            "iterations": int(result.iterations),
            "residual_norm": float(result.residual_norm),
            "flags": {k: bool(v) for k, v in result.flags.items()},
        }
        if extra:
            payload.update(extra)
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self._record(name, "fit")
        return payload

    def schmidt_csv(self, name, result, limit=64):
        coeffs = result.coefficients[:limit]
        self.csv(
            name,
            "schmidt",
            ("mode_index", "coefficient"),
            (np.arange(coeffs.size, dtype=float), coeffs),
        )


def _source(run, pump_key="pump_fwhm_ghz"):
    """Degenerate lab source from the run's boundary parameters."""
    w0 = wavelength_nm_to_omega(run.p["center_wavelength_nm"])
    dws = ghz_to_rads(run.p["single_photon_fwhm_ghz"])
    params = SpdcParams(
        omega_s0=w0,
        omega_i0=w0,
        pump_fwhm=ghz_to_rads(run.p[pump_key]),
        single_photon_fwhm=dws,
    )
    return w0, dws, params


def _stride_for(n, limit=257):
    return max(1, -(-n // limit))


# ---------------------------------------------------------------------------
# lattice analysis helpers (shared with the test suite)
# ---------------------------------------------------------------------------

def locate_intensity_maxima(field2d, threshold=0.05):
    """Sub-sample coordinates of 2-D local maxima above threshold*peak.

    Discrete maxima (8-neighbor, >= so plateau cells tie) are refined with a
    3-point parabola per axis; the refinement recovers positions to a small
    fraction of one grid spacing for smooth peaks.  Returns (ws, wi) arrays.
    """
    z = np.asarray(field2d.values, dtype=float)
    core = z[1:-1, 1:-1]
    mask = core >= threshold * float(z.max())
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nbr = z[1 + di : z.shape[0] - 1 + di, 1 + dj : z.shape[1] - 1 + dj]
            mask &= core >= nbr
    ii, jj = np.nonzero(mask)
    ii = ii + 1
    jj = jj + 1

    def offset(f0, f1, f2):
        den = f0 - 2.0 * f1 + f2
        safe = np.where(den != 0.0, den, 1.0)
        # curvature is negative at a maximum; guard only against a flat triple
        return np.where(np.abs(den) > 1e-30 * np.abs(f1), 0.5 * (f0 - f2) / safe, 0.0)

    di = offset(z[ii - 1, jj], z[ii, jj], z[ii + 1, jj])
    dj = offset(z[ii, jj - 1], z[ii, jj], z[ii, jj + 1])
    hs = field2d.grid_s.spacing
    hi = field2d.grid_i.spacing
    ws = field2d.grid_s.samples[ii] + di * hs
    wi = field2d.grid_i.samples[jj] + dj * hi
    return ws, wi


def lattice_residue(values, pitch):
    """Worst distance of values from the best-aligned lattice of given pitch.

    The lattice offset is free (a fringe carrier fixes it to no particular
    value), so it is estimated as the circular mean of the wrapped phases
    before residues are measured.
    """
    vals = np.asarray(values, dtype=float)
    ang = TWO_PI * vals / pitch
    anchor = math.atan2(
        float(np.mean(np.sin(ang))), float(np.mean(np.cos(ang)))
    ) * pitch / TWO_PI
    r = np.mod(vals - anchor + 0.5 * pitch, pitch) - 0.5 * pitch
    return float(np.max(np.abs(r)))


# ---------------------------------------------------------------------------
# scenario builders
# ---------------------------------------------------------------------------

@_scenario(
    "comb-dimension-series",
    "Joint spectra and marginals for three exchange delays; bin-count report",
    ("jsi", "spectrum"),
    {
        "center_wavelength_nm": 1550.0,
        "single_photon_fwhm_ghz": 300.0,
        "pump_fwhm_ghz": 15.0,
        "tau_h_ps": (0.0, 6.366197723675813, 10.610329539459689),
        "span_bandwidths": 5.0,
    },
    grid_points=1025,
)
def _run_dimension_series(run):
    w0, dws, params = _source(run)
    grid = make_grid(w0, run.p["span_bandwidths"] * dws, run.n)
    f = build_jsa(params, grid, grid)
    stride = _stride_for(run.n)
    cases = []
    for idx, tau_ps in enumerate(run.p["tau_h_ps"]):
        tau = ps_to_s(tau_ps)
        if tau > 0.0:
            out = tpes_jsa(f, InterferometerConfig(tau_H=tau, tau_F=0.0))
            jsi = out.intensity()
            spec = single_mode_spectrum(jsi)
            dec = estimate_dimension(spec, tau)
            case = {
                "tau_h_ps": tau_ps,
                "dimension": dec.dimension,
                "bin_weights": [float(w) for w in dec.bin_weights],
                "bin_spacing_ghz": 1.0 / (2.0 * tau) / 1e9,
            }
        else:
            jsi = f.intensity()
            spec = single_mode_spectrum(jsi)
            # no exchange stage -> no comb: a single bin by construction
            case = {
                "tau_h_ps": tau_ps,
                "dimension": 1,
                "bin_weights": [1.0],
                "bin_spacing_ghz": None,
            }
        run.field_csv(f"jsi-{idx}.csv", "jsi", jsi, stride=stride)
        run.heatmap(f"jsi-{idx}.svg", jsi, f"joint intensity, delay {tau_ps:g} ps")
        det = rads_to_ghz(spec.grid.samples - w0)
        run.csv(
            f"spectrum-{idx}.csv",
            "spectrum",
            ("detuning_ghz", "value"),
            (det, spec.values),
        )
        run.line(
            f"spectrum-{idx}.svg",
            "spectrum",
            det,
            [("marginal", spec.values)],
            f"signal marginal, delay {tau_ps:g} ps",
            "signal detuning [GHz]",
            "spectral density",
        )
        cases.append(case)
    run.report["cases"] = cases


@_scenario(
    "jitter-visibility",
    "Exchange-fringe contrast vs delay under detector-jitter blur",
    ("curve",),
    {
        "center_wavelength_nm": 1550.0,
        "single_photon_fwhm_ghz": 300.0,
        "pump_fwhm_ghz": 0.3,
        "jitter_blur_ghz": 4.0,
        "tau_min_ps": 2.0,
        "tau_max_ps": 18.0,
        "tau_points": 17,
        "report_tau_ps": 16.5,
        "span_bandwidths": 5.0,
    },
    grid_points=2048,
)
def _run_jitter_visibility(run):
    w0, dws, params = _source(run)
    jit = ghz_to_rads(run.p["jitter_blur_ghz"])
    grid = make_grid(w0, run.p["span_bandwidths"] * dws, run.n)
    f = build_jsa(params, grid, grid)
    ref = convolve_gaussian(single_mode_spectrum(f.intensity()), jit)
    taus_ps = np.linspace(
        run.p["tau_min_ps"], run.p["tau_max_ps"], int(run.p["tau_points"])
    )

    def contrast(tau_ps):
        out = tpes_jsa(f, InterferometerConfig(tau_H=ps_to_s(tau_ps), tau_F=0.0))
        comb = convolve_gaussian(single_mode_spectrum(out.intensity()), jit)
        return hom_visibility(comb, ref)

    vis = np.array([contrast(t) for t in taus_ps])
    model = np.exp(-(jit**2) * ps_to_s(taus_ps) ** 2 / (4.0 * LN2))
    run.csv(
        "visibility-curve.csv",
        "curve",
        ("tau_h_ps", "visibility", "jitter_only_model"),
        (taus_ps, vis, model),
    )
    run.line(
        "visibility-curve.svg",
        "curve",
        taus_ps,
        [("pipeline", vis), ("jitter-only model", model)],
        "fringe contrast under timing jitter",
        "exchange delay [ps]",
        "visibility",
    )
    v_at = contrast(run.p["report_tau_ps"])
    run.report["visibility_at_report_tau"] = v_at
    run.report["report_tau_ps"] = run.p["report_tau_ps"]
    run.report["worst_gap_to_jitter_only_model"] = float(np.max(np.abs(vis - model)))


@_scenario(
    "hom-comb-fit",
    "Counting measurement of a comb spectrum via dispersive time mapping, then a model fit",
    ("histogram", "spectrum", "fit"),
    {
        "center_wavelength_nm": 1550.0,
        "single_photon_fwhm_ghz": 300.0,
        "pump_fwhm_ghz": 3.0,
        "tau_h_ps": 16.5,
        "slope_ns_per_nm": -1.58597,
        "intercept_ns": 2458.26,
        "jitter_ps": 49.1,
        "total_counts": 1.0e7,
        "background_rate": 0.0,
        "span_bandwidths": 5.0,
    },
    grid_points=2048,
    uses_rng=True,
)
def _run_hom_comb_fit(run):
    w0, dws, params = _source(run)
    tau = ps_to_s(run.p["tau_h_ps"])
    grid = make_grid(w0, run.p["span_bandwidths"] * dws, run.n)
    f = build_jsa(params, grid, grid)
    out = tpes_jsa(f, InterferometerConfig(tau_H=tau, tau_F=0.0))
    spec = single_mode_spectrum(out.intensity())

    cal = TofsCalibration(
        slope_ns_per_nm=run.p["slope_ns_per_nm"],
        intercept_ns=run.p["intercept_ns"],
        jitter_fwhm=ps_to_s(run.p["jitter_ps"]),
    )
    noise = NoiseModel(
        background_rate=run.p["background_rate"],
        total_signal_counts=run.p["total_counts"],
        rng_seed=run.seed,
    )
    hist_t = synthesize_counts(spec, cal, noise)
    hist_f = histogram_to_frequency(hist_t, cal)
    run.hist_csv("histogram-time.csv", hist_t)
    run.hist_csv("histogram-frequency.csv", hist_f)

    det = rads_to_ghz(spec.grid.samples - w0)
    run.csv(
        "model-spectrum.csv", "spectrum", ("detuning_ghz", "value"), (det, spec.values)
    )
    centers = rads_to_ghz(hist_f.centers - w0)
    run.line(
        "histogram-frequency.svg",
        "histogram",
        centers,
        [("counts", hist_f.counts.astype(float))],
        "comb spectrum as counted",
        "detuning [GHz]",
        "counts per bin",
    )
    res = fit_comb(hist_f)
    expected_ghz = 1.0 / (2.0 * tau) / 1e9
    payload = run.fit_json(
        "comb-fit.json",
        res,
        extra={"expected_spacing_ghz": expected_ghz},
    )
    run.report["fitted_spacing_ghz"] = payload["parameters"]["mode_spacing_hz"]["value"] / 1e9
    run.report["expected_spacing_ghz"] = expected_ghz
    run.report["fitted_visibility"] = payload["parameters"]["visibility"]["value"]
    run.report["total_counts_drawn"] = int(hist_t.counts.sum())


@_scenario(
    "franson-contrast",
    "Arm-imbalance fringe and its fitted visibility for a narrow and a broad pump",
    ("fringe", "fit"),
    {
        "center_wavelength_nm": 1550.0,
        "single_photon_fwhm_ghz": 300.0,
        "pump_fwhm_ghz_narrow": 15.0,
        "pump_fwhm_ghz_broad": 300.0,
        "tau_f_ps": 10.610329539459689,
        "scan_points": 64,
        "scan_periods": 2.0,
    },
    grid_points=1024,
)
def _run_franson_contrast(run):
    w0 = wavelength_nm_to_omega(run.p["center_wavelength_nm"])
    dws = ghz_to_rads(run.p["single_photon_fwhm_ghz"])
    tau_f = ps_to_s(run.p["tau_f_ps"])
    period = TWO_PI / (2.0 * w0)
    half = 0.5 * run.p["scan_periods"] * period
    taus = tau_f + np.linspace(-half, half, int(run.p["scan_points"]))
    offs_fs = (taus - tau_f) * 1e15

    rows = {}
    for tag in ("narrow", "broad"):
        params = SpdcParams(
            omega_s0=w0,
            omega_i0=w0,
            pump_fwhm=ghz_to_rads(run.p[f"pump_fwhm_ghz_{tag}"]),
            single_photon_fwhm=dws,
        )
        cfg = InterferometerConfig(tau_H=0.0, tau_F=tau_f)
        grid = make_grid(w0, 5.0 * dws, run.n)
        fs = fringe_scan(params, cfg, taus, grid=grid)
        res = fit_fringe(fs)
        dwp = params.pump_fwhm
        analytic = math.exp(-(dwp**2) * tau_f**2 / (16.0 * LN2))
        run.csv(
            f"fringe-{tag}.csv",
            "fringe",
            ("tau_f_ps", "probability"),
            (s_to_ps(taus), fs.probabilities),
        )
        run.fit_json(
            f"fringe-fit-{tag}.json", res, extra={"analytic_visibility": analytic}
        )
        rows[tag] = (fs.probabilities, res.parameters["visibility"], analytic)

    run.line(
        "fringes.svg",
        "fringe",
        offs_fs,
        [
            ("narrow pump", rows["narrow"][0] / rows["narrow"][0].max()),
            ("broad pump", rows["broad"][0] / rows["broad"][0].max()),
        ],
        "arm-imbalance fringes",
        "imbalance offset [fs]",
        "normalized coincidence",
    )
    run.report["visibility_narrow"] = rows["narrow"][1]
    run.report["visibility_broad"] = rows["broad"][1]
    run.report["analytic_narrow"] = rows["narrow"][2]
    run.report["analytic_broad"] = rows["broad"][2]


@_scenario(
    "schmidt-ladder",
    "Mode count vs pump bandwidth, bare source and with the exchange comb",
    ("curve", "schmidt"),
    {
        "center_wavelength_nm": 1550.0,
        "single_photon_fwhm_ghz": 300.0,
        "pump_divisors": (1.0, 2.0, 5.0, 20.0, 100.0),
        "tau_scaled": 16.0,
        "span_bandwidths": 5.0,
    },
    grid_points=1024,
)
def _run_schmidt_ladder(run):
    w0 = wavelength_nm_to_omega(run.p["center_wavelength_nm"])
    dws = ghz_to_rads(run.p["single_photon_fwhm_ghz"])
    tau = run.p["tau_scaled"] / dws
    grid = make_grid(w0, run.p["span_bandwidths"] * dws, run.n)
    divisors = np.asarray(run.p["pump_divisors"], dtype=float)
    k_bare, k_comb, k_model = [], [], []
    last_comb = None
    for d in divisors:
        rho = 1.0 / d
        params = SpdcParams(
            omega_s0=w0, omega_i0=w0, pump_fwhm=rho * dws, single_photon_fwhm=dws
        )
        f = build_jsa(params, grid, grid)
        k_bare.append(schmidt_number(f).schmidt_number)
        # closed form for the bare double-Gaussian amplitude
        k_model.append((rho**2 + 1.0) / (2.0 * rho))
        out = tpes_jsa(f, InterferometerConfig(tau_H=tau, tau_F=0.0))
        last_comb = schmidt_number(out)
        k_comb.append(last_comb.schmidt_number)
    run.csv(
        "mode-count.csv",
        "curve",
        ("pump_divisor", "k_bare", "k_bare_model", "k_comb"),
        (divisors, k_bare, k_model, k_comb),
    )
    run.line(
        "mode-count.svg",
        "curve",
        divisors,
        [("bare source", np.array(k_bare)), ("with comb", np.array(k_comb))],
        "effective mode count vs pump divisor",
        "bandwidth divisor",
        "mode count",
    )
    run.schmidt_csv("schmidt-coefficients.csv", last_comb)
    run.report["rows"] = [
        {
            "pump_divisor": float(d),
            "k_bare": float(kb),
            "k_bare_model": float(km),
            "k_comb": float(kc),
        }
        for d, kb, km, kc in zip(divisors, k_bare, k_model, k_comb)
    ]


@_scenario(
    "mode-count-bound",
    "Conservative mode-count bound from a measured fringe visibility",
    ("curve",),
    {
        "measured_visibility": 0.972,
        "tau_h_ps": 6.14,
        "jitter_blur_ghz": 4.0,
        "single_photon_fwhm_ghz": 300.0,
    },
    grid_points=2048,
)
def _run_mode_count_bound(run):
    dws = ghz_to_rads(run.p["single_photon_fwhm_ghz"])
    jit = ghz_to_rads(run.p["jitter_blur_ghz"])
    tau = ps_to_s(run.p["tau_h_ps"])
    curve = kf_curve(tau, jit, dws, n_cap=run.n)
    bound = kf_from_visibility(
        run.p["measured_visibility"], tau, jit, dws, curve=curve
    )
    vs, ks, ladder = curve
    run.csv(
        "bound-curve.csv",
        "curve",
        ("pump_fwhm_ghz", "visibility", "mode_count"),
        (ladder / (TWO_PI * 1e9), vs, ks),
    )
    order = np.argsort(vs)
    run.line(
        "bound-curve.svg",
        "curve",
        vs[order],
        [("mode count", ks[order])],
        "mode count vs predicted visibility",
        "visibility",
        "mode count",
    )
    run.report["measured_visibility"] = run.p["measured_visibility"]
    run.report["mode_count_bound"] = float(bound)
    run.report["saturated"] = bound.saturated


@_scenario(
    "delay-matched-lattice",
    "Equal-delay output: maxima on a square frequency lattice of pitch 2*pi/tau",
    ("jsi",),
    {
        "center_wavelength_nm": 1550.0,
        "single_photon_fwhm_ghz": 300.0,
        "pump_ratio": 1.0,
        "tau_scaled": 96.0,
        "span_bandwidths": 6.0,
        "threshold": 0.05,
    },
    grid_points=1025,
)
def _run_delay_matched_lattice(run):
    w0 = wavelength_nm_to_omega(run.p["center_wavelength_nm"])
    dws = ghz_to_rads(run.p["single_photon_fwhm_ghz"])
    tau = run.p["tau_scaled"] / dws
    params = SpdcParams(
        omega_s0=w0,
        omega_i0=w0,
        pump_fwhm=run.p["pump_ratio"] * dws,
        single_photon_fwhm=dws,
    )
    grid = make_grid(w0, run.p["span_bandwidths"] * dws, run.n)
    f = build_jsa(params, grid, grid)
    out = tpes_jsa(f, InterferometerConfig(tau_H=tau, tau_F=tau))
    jsi = out.intensity()
    ws, wi = locate_intensity_maxima(jsi, threshold=run.p["threshold"])
    pitch = TWO_PI / tau
    res_diff = lattice_residue(ws - wi, pitch)
    res_sum = lattice_residue(ws + wi, pitch)
    run.field_csv("lattice-jsi.csv", "jsi", jsi, stride=_stride_for(run.n))
    run.heatmap("lattice-jsi.svg", jsi, "equal-delay joint intensity")
    run.report.update(
        {
            "maxima_count": int(ws.size),
            "pitch_ghz": rads_to_ghz(pitch),
            "grid_spacing_ghz": rads_to_ghz(grid.spacing),
            "residue_diff_axis_ghz": rads_to_ghz(res_diff),
            "residue_sum_axis_ghz": rads_to_ghz(res_sum),
            "on_lattice": bool(max(res_diff, res_sum) <= grid.spacing),
        }
    )


@_scenario(
    "satellite-terms",
    "Opposite-arm terms: exact null, energy bookkeeping, and the distinguishable limit",
    ("jsi",),
    {
        "center_wavelength_nm": 1550.0,
        "single_photon_fwhm_ghz": 300.0,
        "pump_fwhm_ghz": 75.0,
        "tau_scaled": 7.3,
        "nondegenerate_split_bandwidths": 10.0,
        "span_bandwidths": 5.0,
    },
    grid_points=1024,
)
def _run_satellite_terms(run):
    w0, dws, params = _source(run)
    grid = make_grid(w0, run.p["span_bandwidths"] * dws, run.n)
    f = build_jsa(params, grid, grid)
    tau = run.p["tau_scaled"] / dws

    null = satellite_jsi(f, 0.0)
    run.report["null_peak"] = float(null.values.max())

    sat = satellite_jsi(f, tau)
    m_main = 0.5 * integrate_2d(tpes_jsa(f, InterferometerConfig(tau_H=tau, tau_F=0.0)).intensity())
    m_sat = integrate_2d(sat)
    m_in = integrate_2d(f.intensity())
    closure = (m_main + 2.0 * m_sat) / (0.5 * m_in)
    run.field_csv("satellite-jsi.csv", "jsi", sat, stride=_stride_for(run.n))
    run.heatmap("satellite-jsi.svg", sat, "opposite-arm intensity")
    run.report["energy_closure_ratio"] = float(closure)

    split = run.p["nondegenerate_split_bandwidths"]
    params_nd = SpdcParams(
        omega_s0=w0 + 0.5 * split * dws,
        omega_i0=w0 - 0.5 * split * dws,
        pump_fwhm=params.pump_fwhm,
        single_photon_fwhm=dws,
    )
    span_nd = (split + 8.0) * dws
    grid_nd = make_grid(w0, span_nd, run.n + 1)
    f_nd = build_jsa(params_nd, grid_nd, grid_nd)
    ratio = integrate_2d(satellite_jsi(f_nd, 0.0)) / (
        0.125 * integrate_2d(f_nd.intensity())
    )
    run.report["distinguishable_mass_ratio"] = float(ratio)


@_scenario(
    "pump-frequency-scan",
    "Coincidence fringe traced by tuning the pump at fixed arm imbalance",
    ("fringe", "fit"),
    {
        "center_wavelength_nm": 1550.0,
        "single_photon_fwhm_ghz": 0.3,
        "pump_fwhm_ghz": 0.01,
        "tau_f_ns": 9.0,
        "scan_points": 48,
        "scan_periods": 2.0,
        "span_bandwidths": 5.0,
    },
    grid_points=1025,
)
def _run_pump_frequency_scan(run):
    w0, dws, params = _source(run)
    tau_f = ns_to_s(run.p["tau_f_ns"])
    period = TWO_PI / tau_f  # fringe period along the pump-offset axis
    half = 0.5 * run.p["scan_periods"] * period
    offsets = np.linspace(-half, half, int(run.p["scan_points"]))
    cfg = InterferometerConfig(tau_H=0.0, tau_F=tau_f, phase_mode="pump_scan")
    grid = make_grid(w0, run.p["span_bandwidths"] * dws, run.n)
    fs = fringe_scan(params, cfg, offsets, grid=grid)
    res = fit_fringe(fs)
    fitted_period = TWO_PI / res.parameters["carrier"]
    run.csv(
        "pump-fringe.csv",
        "fringe",
        ("pump_offset_ghz", "probability"),
        (rads_to_ghz(offsets), fs.probabilities),
    )
    run.line(
        "pump-fringe.svg",
        "fringe",
        rads_to_ghz(offsets),
        [("coincidence", fs.probabilities)],
        "pump-tuning fringe",
        "pump offset [GHz]",
        "coincidence probability",
    )
    run.fit_json(
        "pump-fringe-fit.json",
        res,
        extra={
            "expected_period_ghz": rads_to_ghz(period),
            "fitted_period_ghz": rads_to_ghz(fitted_period),
        },
    )
    run.report["expected_period_ghz"] = rads_to_ghz(period)
    run.report["fitted_period_ghz"] = rads_to_ghz(fitted_period)
    run.report["relative_period_error"] = abs(fitted_period - period) / period


@_scenario(
    "bin-phase-uniformity",
    "Per-bin mode count and arm-imbalance fringe phase across a five-bin comb",
    ("schmidt", "fringe", "fit"),
    {
        "center_wavelength_nm": 1550.0,
        "single_photon_fwhm_ghz": 300.0,
        "pump_fwhm_ghz": 15.0,
        "tau_scaled": 12.0,
        "reference_tau_scaled": 2.0,
        "scan_points": 64,
        "span_bandwidths": 5.0,
    },
    grid_points=1024,
)
def _run_bin_phase_uniformity(run):
    w0, dws, params = _source(run)
    tau = run.p["tau_scaled"] / dws
    grid = make_grid(w0, run.p["span_bandwidths"] * dws, run.n)
    f = build_jsa(params, grid, grid)
    out = tpes_jsa(f, InterferometerConfig(tau_H=tau, tau_F=0.0))
    dec = estimate_dimension(single_mode_spectrum(out.intensity()), tau)

    tau_f0 = run.p["reference_tau_scaled"] / dws
    period = TWO_PI / (2.0 * w0)
    taus = np.linspace(tau_f0 - period, tau_f0 + period, int(run.p["scan_points"]))
    s = grid.samples
    wsum = s[:, None] + s[None, :]
    h = grid.spacing

    half = (dec.dimension - 1) // 2
    rows = []
    thetas = []
    fringes = []
    for nbin in range(-half, half + 1):
        b = extract_bin(out, dec, nbin)
        k_bin = schmidt_number(b).schmidt_number
        inten = b.intensity().values
        mass = float(np.trapezoid(np.trapezoid(inten, dx=h, axis=1), dx=h))
        probs = np.array(
            [
                float(
                    np.trapezoid(
                        np.trapezoid(inten * np.cos(wsum * t / 2.0) ** 2, dx=h, axis=1),
                        dx=h,
                    )
                )
                for t in taus
            ]
        ) / mass
        res = fit_fringe(FringeScan(taus, probs, "delay_scan"))
        theta = float(
            np.mod(res.parameters["carrier"] * tau_f0 + res.parameters["phase"], TWO_PI)
        )
        thetas.append(theta)
        fringes.append((f"bin {nbin:+d}", probs))
        rows.append(
            {
                "bin": nbin,
                "weight": float(dec.bin_weights[half + nbin]),
                "mode_count": float(k_bin),
                "fringe_visibility": float(res.parameters["visibility"]),
                "phase_at_reference_rad": theta,
            }
        )
    spread = float(np.ptp(np.unwrap(np.array(thetas))))
    offs_fs = (taus - tau_f0) * 1e15
    run.csv(
        "bin-fringes.csv",
        "fringe",
        ("tau_f_offset_fs",) + tuple(f"bin_{r['bin']:+d}" for r in rows),
        (offs_fs,) + tuple(p for _, p in fringes),
    )
    run.line(
        "bin-fringes.svg",
        "fringe",
        offs_fs,
        fringes,
        "per-bin arm-imbalance fringes",
        "imbalance offset [fs]",
        "normalized coincidence",
    )
    with open(run.path("bin-report.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(
            {"bins": rows, "phase_spread_rad": spread},
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    run._record("bin-report.json", "fit")
    run.csv(
        "bin-mode-counts.csv",
        "schmidt",
        ("bin", "mode_count"),
        ([float(r["bin"]) for r in rows], [r["mode_count"] for r in rows]),
    )
    run.report["dimension"] = dec.dimension
    run.report["bins"] = rows
    run.report["phase_spread_rad"] = spread


@_scenario(
    "sinc-phasematch",
    "Sinc-profile source: joint intensity, marginal sidebands, first-zero check",
    ("jsi", "spectrum"),
    {
        "center_wavelength_nm": 1550.0,
        "single_photon_fwhm_ghz": 300.0,
        "pump_fwhm_ghz": 15.0,
        "span_bandwidths": 64.0,
    },
    grid_points=2049,
)
def _run_sinc_phasematch(run):
    w0 = wavelength_nm_to_omega(run.p["center_wavelength_nm"])
    dws = ghz_to_rads(run.p["single_photon_fwhm_ghz"])
    params = SpdcParams(
        omega_s0=w0,
        omega_i0=w0,
        pump_fwhm=ghz_to_rads(run.p["pump_fwhm_ghz"]),
        single_photon_fwhm=dws,
        model="sinc",
    )
    grid = make_grid(w0, run.p["span_bandwidths"] * dws, run.n)
    f = build_jsa(params, grid, grid)
    jsi = f.intensity()
    run.field_csv("sinc-jsi.csv", "jsi", jsi, stride=_stride_for(run.n))
    run.heatmap("sinc-jsi.svg", jsi, "sinc-profile joint intensity")

    spec = single_mode_spectrum(jsi)
    det = rads_to_ghz(spec.grid.samples - w0)
    run.csv("sinc-marginal.csv", "spectrum", ("detuning_ghz", "value"), (det, spec.values))
    run.line(
        "sinc-marginal.svg",
        "spectrum",
        det,
        [("marginal", spec.values / spec.values.max())],
        "sinc-profile marginal",
        "signal detuning [GHz]",
        "normalized density",
    )

    # first zero of the amplitude along the anti-diagonal cut (sum frequency
    # pinned at its center, odd point count puts samples exactly on the cut)
    n = grid.n_points
    cut = np.real(f.values[np.arange(n), n - 1 - np.arange(n)])
    x = grid.samples - w0
    mid = n // 2
    zero = None
    for i in range(mid, n - 1):
        if cut[i] > 0.0 and cut[i + 1] < 0.0:
            frac = cut[i] / (cut[i] - cut[i + 1])
            zero = 2.0 * (x[i] + frac * (x[i + 1] - x[i]))  # difference detuning
            break
    y = spec.values / spec.values.max()
    sideband = 0.0
    past_dip = False
    for i in range(mid + 1, n - 1):
        if not past_dip and y[i] < y[i - 1] and y[i] <= y[i + 1]:
            past_dip = True
        if past_dip and y[i] > y[i - 1] and y[i] >= y[i + 1]:
            sideband = float(y[i])
            break
    run.report["first_zero_difference_detuning_ghz"] = (
        None if zero is None else float(rads_to_ghz(zero))
    )
    run.report["first_zero_over_pi_bandwidths"] = (
        None if zero is None else float(zero / (math.pi * dws))
    )
    run.report["first_sideband_fraction"] = sideband


@_scenario(
    "background-recovery",
    "Fringe visibility before and after subtracting a flat background from counts",
    ("histogram", "fit"),
    {
        "visibility_true": 0.983,
        "background_fraction": 0.0898,
        "amplitude_counts": 2.0e4,
        "phase_points": 481,
        "phase_periods": 2.0,
    },
    grid_points=0,
    uses_rng=True,
)
def _run_background_recovery(run):
    v = run.p["visibility_true"]
    b_frac = run.p["background_fraction"]
    amp = run.p["amplitude_counts"]
    npts = int(run.p["phase_points"])
    phis = np.linspace(0.0, run.p["phase_periods"] * TWO_PI, npts)
    lam = (1.0 + v * np.cos(phis) + b_frac) * amp
    step = phis[1] - phis[0]
    edges = np.concatenate([phis - 0.5 * step, [phis[-1] + 0.5 * step]])
    counts = np.random.default_rng(run.seed).poisson(lam).astype(np.int64)
    hist = CountHistogram(bin_edges=edges, counts=counts, unit="rad")

    res_raw = fit_fringe(hist)
    sub = subtract_background(hist, b_frac * amp)
    res_sub = fit_fringe(sub)

    run.hist_csv("fringe-counts.csv", hist)
    run.hist_csv("fringe-subtracted.csv", sub)
    run.line(
        "fringe-counts.svg",
        "histogram",
        phis,
        [("counts", counts.astype(float)), ("subtracted", sub.values)],
        "phase fringe with flat background",
        "phase [rad]",
        "counts per bin",
    )
    run.fit_json("fringe-fit-raw.json", res_raw)
    run.fit_json("fringe-fit-subtracted.json", res_sub)
    run.report["visibility_true"] = v
    run.report["raw_visibility"] = float(res_raw.parameters["raw_visibility"])
    run.report["recovered_visibility"] = float(res_sub.parameters["visibility"])


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

_TOP_KEYS = ("scenario", "seed", "grid", "params")


def _find_line(text: str, key: str):
    pat = re.compile(rf"^\s*(?:\[?\s*)?{re.escape(key)}\s*[=\].]")
    for i, line in enumerate(text.splitlines(), 1):
        if pat.match(line.split("#", 1)[0]):
            return i
    return None


def _cite(text: str, key: str) -> str:
    line = _find_line(text, key.split(".")[-1])
    return f" (line {line})" if line is not None else ""


def _coerce(key, default, value, text):
    where = _cite(text, key)
    if isinstance(default, bool) or isinstance(value, bool):
        raise ConfigError(f"key '{key}'{where}: booleans are not accepted here")
    if isinstance(default, tuple):
        if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            raise ConfigError(f"key '{key}'{where} must be an array of numbers")
        return tuple(float(v) for v in value)
    if isinstance(default, float):
        if not isinstance(value, (int, float)):
            raise ConfigError(f"key '{key}'{where} must be a number")
        return float(value)
    if isinstance(default, int):
        if not isinstance(value, int):
            raise ConfigError(f"key '{key}'{where} must be an integer")
        return int(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"key '{key}'{where} must be a string")
        return value
    raise ConfigError(f"key '{key}'{where} has an unsupported type")


def load_config(path):
    """Parse a scenario TOML file -> (scenario, params, seed, grid).

    Every key is validated against the named scenario's defaults; unknown or
    mistyped keys raise ConfigError citing the offending line.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        # the decoder message already carries "at line N, column M"
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc

    for key in doc:
        if key not in _TOP_KEYS:
            raise ConfigError(
                f"unknown key '{key}'{_cite(text, key)}: expected one of {', '.join(_TOP_KEYS)}"
            )
    if "scenario" not in doc:
        raise ConfigError(f"config {path} is missing the 'scenario' key")
    if not isinstance(doc["scenario"], str):
        raise ConfigError(f"key 'scenario'{_cite(text, 'scenario')} must be a string")
    scenario = get_scenario(doc["scenario"])

    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise ConfigError(f"key 'seed'{_cite(text, 'seed')} must be an integer")
    grid = doc.get("grid")
    if grid is not None:
        if not isinstance(grid, int) or isinstance(grid, bool) or grid < 2:
            raise ConfigError(f"key 'grid'{_cite(text, 'grid')} must be an integer >= 2")

    raw_params = doc.get("params", {})
    if not isinstance(raw_params, dict):
        raise ConfigError(f"key 'params'{_cite(text, 'params')} must be a table")
    params = dict(scenario.defaults)
    for key, value in raw_params.items():
        if key not in scenario.defaults:
            valid = ", ".join(sorted(scenario.defaults))
            raise ConfigError(
                f"unknown key 'params.{key}'{_cite(text, key)} for scenario "
                f"'{scenario.name}'; valid keys: {valid}"
            )
        params[key] = _coerce(f"params.{key}", scenario.defaults[key], value, text)
    return scenario, params, seed, grid


def _is_config_target(target: str) -> bool:
    return target.endswith(".toml") or os.path.sep in target or os.path.isfile(target)


def run_scenario(target, out_dir, seed=None, grid_n=None):
    """Run a catalog scenario (by name or TOML config path) into out_dir.

    Explicit seed / grid_n arguments outrank values from a config file.
    Returns the manifest dict (also written as manifest.json).
    """
    if isinstance(target, Scenario):
        scenario, params, cfg_seed, cfg_grid = target, dict(target.defaults), None, None
    elif _is_config_target(str(target)):
        scenario, params, cfg_seed, cfg_grid = load_config(target)
    else:
        scenario = get_scenario(str(target))
        params, cfg_seed, cfg_grid = dict(scenario.defaults), None, None

    use_seed = seed if seed is not None else (cfg_seed if cfg_seed is not None else 1)
    use_grid = grid_n if grid_n is not None else (cfg_grid if cfg_grid is not None else scenario.grid_points)

    os.makedirs(out_dir, exist_ok=True)
    run = _Run(scenario, params, use_grid, use_seed, out_dir)
    _BUILDERS[scenario.name](run)

    manifest = {
        "scenario": scenario.name,
        "description": scenario.description,
        "outputs": list(scenario.outputs),
        "params": {
            k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()
        },
        "seed": use_seed,
        "grid_points": use_grid,
        "files": run.files,
        "report": run.report,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
