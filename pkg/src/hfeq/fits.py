"""Least-squares parameter recovery for count data and fringe scans.

Three fitters:

* fit_comb — combed single-photon spectrum, model
      N0/2 * exp(-16 ln2 (w-c)^2 / dw^2) * (1 + V cos(2 (w-c) tau)),
  solved by a small damped (Levenberg-style) normal-equation loop.  The
  objective is badly multimodal in tau, so tau is seeded from the dominant
  nonzero peak of the data's power spectrum — equivalent to the FFT of the
  autocorrelation — before the solver ever runs.  Bounds (V in [0, 1.05],
  tau > 0, dw > 0, N0 > 0) are enforced by elementwise reparametrization so
  the solver itself stays unconstrained.
* fit_fringe — sinusoidal coincidence fringe B + A(1 + V cos(w x + phi)).
  The carrier is located by FFT plus a local refinement; everything else is
  a weighted linear solve, so it is exact and cheap.
* fit_linear_calibration — ordinary least squares on (wavelength, time)
  pairs.

Count data are weighted by 1/max(count, 1) (Poisson); noiseless model scans
are fit unweighted.  Covariances come from the weighted normal matrix at
the solution, mapped through the reparametrization by the delta method.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detection import BackgroundSubtracted, CountHistogram
from .errors import InvalidArgumentError, PreconditionError
from .interferometer import FringeScan
from .units import LN2

__all__ = ["FitResult", "fit_comb", "fit_fringe", "fit_linear_calibration"]

CLASSICAL_VISIBILITY_BOUND = 0.707


@dataclass(frozen=True)
class FitResult:
    """Named parameters with units, per-parameter variances, and diagnostics.

    cost_trace records the weighted squared residual at every ACCEPTED step;
    it is non-increasing by construction of the solver.  converged means the
    residual gradient shrank below 1e-8 of its initial norm within the
    iteration cap.
    """

    parameters: dict
    units: dict
    covariance_diag: dict
    residual_norm: float
    converged: bool
    iterations: int
    flags: dict = field(default_factory=dict)
    cost_trace: tuple = ()

    def stderr(self, name: str) -> float:
        var = self.covariance_diag.get(name)
        return float(np.sqrt(var)) if var is not None and var >= 0.0 else float("nan")

    def to_report(self) -> dict:
        return {
            name: {
                "value": float(value),
                "unit": self.units.get(name, ""),
                "stderr": self.stderr(name),
            }
            for name, value in self.parameters.items()
        }


# ---------------------------------------------------------------------------
# damped least-squares engine
# ---------------------------------------------------------------------------

def _numeric_jacobian(resid, x: np.ndarray, m: int) -> np.ndarray:
    J = np.empty((m, x.size))
    for i in range(x.size):
        step = 1e-6 * max(abs(x[i]), 1e-3)
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        J[:, i] = (resid(xp) - resid(xm)) / (2.0 * step)
    return J


def _gradient_cosine(J: np.ndarray, r: np.ndarray) -> float:
    """Largest cosine between the residual and any Jacobian column.

    Zero at a stationary point (first-order optimality), independent of the
    scale of either the data or the parameters.
    """
    r_norm = float(np.linalg.norm(r))
    if r_norm == 0.0:
        return 0.0
    col_norms = np.linalg.norm(J, axis=0) * r_norm
    g = np.abs(J.T @ r)
    cos = np.divide(g, col_norms, out=np.zeros_like(g), where=col_norms > 0.0)
    return float(cos.max())


def _levenberg(
    resid,
    x0: np.ndarray,
    cap: int = 200,
    gtol: float = 1e-8,
    ftol: float = 1e-12,
    xtol: float = 1e-12,
):
    """Damped normal-equation minimizer of sum(resid(x)^2).

    Steps are only ever accepted when they lower the cost, so the accepted
    cost trace is strictly decreasing.  converged means any of: the residual
    is numerically orthogonal to the model tangent space (first-order
    optimality), the cost stopped falling to relative precision ftol, or the
    step pinned the parameters to relative precision xtol — so a restart at
    the solution reports converged at once instead of chasing rounding
    noise.  Returns (x, cov, converged, iterations, cost_trace); cov is the
    inverse normal matrix at the solution.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = resid(x)
    cost = float(r @ r)
    trace = [cost]
    J = _numeric_jacobian(resid, x, r.size)
    g = J.T @ r
    converged = cost == 0.0 or _gradient_cosine(J, r) <= gtol
    damp = 1e-3
    iterations = 0
    while iterations < cap and not converged:
        iterations += 1
        A = J.T @ J
        diag = np.diag(np.clip(np.diag(A), 1e-30, None))
        try:
            delta = np.linalg.solve(A + damp * diag, -g)
        except np.linalg.LinAlgError:
            damp *= 10.0
            continue
        step_pinned = float(np.linalg.norm(delta)) <= xtol * (float(np.linalg.norm(x)) + xtol)
        xt = x + delta
        rt = resid(xt)
        ct = float(rt @ rt)
        if ct < cost:
            flat = cost - ct <= ftol * cost
            x, r, cost = xt, rt, ct
            trace.append(cost)
            J = _numeric_jacobian(resid, x, r.size)
            g = J.T @ r
            damp = max(damp / 3.0, 1e-14)
            converged = (
                cost == 0.0 or flat or step_pinned or _gradient_cosine(J, r) <= gtol
            )
        else:
            if step_pinned:
                # the damped step has shrunk to machine precision and still
                # cannot lower the cost: this is the floor, not a failure
                converged = True
                break
            damp *= 4.0
            if damp > 1e14:
                break
    A = J.T @ J
    try:
        cov = np.linalg.inv(A)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(A)
    return x, cov, converged, iterations, tuple(trace)


# ---------------------------------------------------------------------------
# data extraction helpers
# ---------------------------------------------------------------------------

def _xy_weights(data):
    """(x, y, w, weighted?) from a histogram-like or scan-like object."""
    if isinstance(data, CountHistogram):
        return data.centers, data.counts.astype(float), None, True
    if isinstance(data, BackgroundSubtracted):
        return data.centers, data.values.astype(float), None, True
    if isinstance(data, FringeScan):
        return data.scan_values, data.probabilities, None, False
    raise InvalidArgumentError(f"cannot fit data of type {type(data).__name__}")


def _poisson_weights(y: np.ndarray) -> np.ndarray:
    return 1.0 / np.maximum(y, 1.0)


def _dominant_fft_peak(x: np.ndarray, y: np.ndarray, k_min: int = 3) -> float:
    """Frequency (cycles per x-unit) of the strongest non-envelope component."""
    h = float(x[1] - x[0])
    power = np.abs(np.fft.rfft(y - y.mean())) ** 2
    if power.size <= k_min + 1:
        raise PreconditionError("too few samples to locate an oscillation")
    k = int(np.argmax(power[k_min:])) + k_min
    return float(np.fft.rfftfreq(y.size, d=h)[k])


# ---------------------------------------------------------------------------
# comb fit
# ---------------------------------------------------------------------------

def _comb_physical(u: np.ndarray) -> tuple[float, float, float, float, float]:
    n0 = float(np.exp(u[0]))
    v = 1.05 / (1.0 + np.exp(-u[1]))
    tau = float(np.exp(u[2]))
    dw = float(np.exp(u[3]))
    c = float(u[4])
    return n0, float(v), tau, dw, c


def _comb_model(u: np.ndarray, x: np.ndarray) -> np.ndarray:
    n0, v, tau, dw, c = _comb_physical(u)
    d = x - c
    env = np.exp(-16.0 * LN2 * (d / dw) ** 2)
    return 0.5 * n0 * env * (1.0 + v * np.cos(2.0 * d * tau))


def _count_teeth(x: np.ndarray, y: np.ndarray, tau0: float) -> int:
    # quarter-period boxcar smoothing, then strict local maxima above 5% of peak
    h = float(x[1] - x[0])
    width = max(1, int(round(0.25 * (np.pi / tau0) / h)))
    kernel = np.ones(width) / width
    ys = np.convolve(y, kernel, mode="same")
    lvl = 0.05 * ys.max()
    inner = ys[1:-1]
    peaks = (inner > ys[:-2]) & (inner >= ys[2:]) & (inner >= lvl)
    return int(np.count_nonzero(peaks))


def fit_comb(data, cap: int = 200) -> FitResult:
    """Recover (peak count, visibility, delay, envelope width, center) from a
    combed frequency histogram.

    Needs at least three visible comb teeth — with fewer, the
    delay/visibility pair is ill-conditioned and the fit is refused.
    """
    x_raw, y, _, weighted = _xy_weights(data)
    if isinstance(data, (CountHistogram, BackgroundSubtracted)) and data.unit not in ("rad/s",):
        raise InvalidArgumentError(
            f"fit_comb expects a frequency histogram (unit 'rad/s'), got {data.unit!r}"
        )
    x_mid = 0.5 * (float(x_raw[0]) + float(x_raw[-1]))
    x = np.asarray(x_raw, dtype=float) - x_mid
    w = _poisson_weights(y) if weighted else np.ones_like(y)
    sw = np.sqrt(w)

    total = float(y.sum())
    if total <= 0.0:
        raise PreconditionError("histogram is empty")
    c0 = float((x * y).sum() / total)
    var = float(((x - c0) ** 2 * y).sum() / total)
    dw0 = max(np.sqrt(32.0 * LN2 * max(var, 0.0)), 4.0 * float(x[1] - x[0]))
    v0 = 0.7
    n00 = 2.0 * float(y.max()) / (1.0 + v0)

    # the envelope's own transform occupies the lowest bins (lobe sigma in
    # bin units = span / (2 pi sigma_x)); the comb line must be sought above it
    span = float(x[-1] - x[0])
    sigma_x = max(np.sqrt(max(var, 0.0)), float(x[1] - x[0]))
    k_env = int(np.ceil(3.0 * span / (2.0 * np.pi * sigma_x))) + 1
    nu = _dominant_fft_peak(x, y, k_min=max(3, k_env))
    tau0 = np.pi * nu  # comb oscillates as cos(2 d tau): nu = tau/pi
    if tau0 <= 0.0:
        raise PreconditionError("no oscillatory component found in the data")
    teeth = _count_teeth(x, y, tau0)
    if teeth < 3:
        raise PreconditionError(
            f"need >= 3 visible comb teeth for a conditioned fit, found {teeth}"
        )

    u0 = np.array([np.log(n00), np.log((v0 / 1.05) / (1.0 - v0 / 1.05)), np.log(tau0), np.log(dw0), c0])

    def make_resid(sqrt_w: np.ndarray):
        def resid(u: np.ndarray) -> np.ndarray:
            return (_comb_model(u, x) - y) * sqrt_w

        return resid

    u, cov_u, converged, iterations, trace = _levenberg(make_resid(sw), u0, cap=cap)
    if weighted:
        # reweight by the EXPECTED counts: observed-count weights correlate
        # with the noise itself and drag the contrast up in low-count bins
        for _ in range(2):
            sw = np.sqrt(_poisson_weights(_comb_model(u, x)))
            u, cov_u, converged, it2, trace = _levenberg(make_resid(sw), u, cap=cap)
            iterations += it2
    n0, v, tau, dw, c_int = _comb_physical(u)
    c = c_int + x_mid

    # delta method through the elementwise reparametrization
    grads = np.array([n0, v * (1.0 - v / 1.05), tau, dw, 1.0])
    var_phys = np.clip(np.diag(cov_u), 0.0, None) * grads**2
    # cos(2 d tau) repeats every pi/tau rad/s, i.e. every 1/(2 tau) Hz;
    # a delay collapsed to zero (exp underflow) is a degenerate fit, not a crash
    if tau > 0.0:
        spacing_hz = 1.0 / (2.0 * tau)
    else:
        spacing_hz = float("inf")
        converged = False

    params = {
        "peak_count": n0,
        "visibility": v,
        "comb_delay": tau,
        "envelope_fwhm": dw,
        "center": c,
        "mode_spacing_hz": spacing_hz,
    }
    units = {
        "peak_count": "counts",
        "visibility": "",
        "comb_delay": "s",
        "envelope_fwhm": "rad/s",
        "center": "rad/s",
        "mode_spacing_hz": "Hz",
    }
    cov_diag = {
        "peak_count": float(var_phys[0]),
        "visibility": float(var_phys[1]),
        "comb_delay": float(var_phys[2]),
        "envelope_fwhm": float(var_phys[3]),
        "center": float(var_phys[4]),
        "mode_spacing_hz": float(var_phys[2]) * (spacing_hz / tau) ** 2,
    }
    return FitResult(
        parameters=params,
        units=units,
        covariance_diag=cov_diag,
        residual_norm=float(np.sqrt(trace[-1])),
        converged=converged,
        iterations=iterations,
        cost_trace=trace,
    )


# ---------------------------------------------------------------------------
# fringe fit
# ---------------------------------------------------------------------------

def _linear_fringe_solve(x, y, w, omega):
    X = np.column_stack([np.ones_like(x), np.cos(omega * x), np.sin(omega * x)])
    Xw = X * w[:, None]
    A = X.T @ Xw
    b = Xw.T @ y
    coef = np.linalg.solve(A, b)
    r = X @ coef - y
    rss = float((w * r * r).sum())
    return coef, rss, A


def fit_fringe(data, background: float = 0.0, cap: int = 64) -> FitResult:
    """Fit B + A(1 + V cos(w x + phi)) to a fringe scan or phase histogram.

    The background B is not separable from a fringe scan alone (only A+B and
    A*V are identifiable), so it must be supplied — zero for background-free
    model scans, or the independently estimated level for raw count data.
    raw_visibility reports A*V/(A+B) regardless.
    """
    if background < 0.0:
        raise InvalidArgumentError("background must be >= 0")
    x, y, _, weighted = _xy_weights(data)
    x = np.asarray(x, dtype=float)
    w = _poisson_weights(y) if weighted else np.ones_like(y)

    nu0 = _dominant_fft_peak(x, y, k_min=1)
    span = float(x[-1] - x[0])
    # local refinement around the FFT cell: deterministic dense scan + parabola
    cell = 1.0 / span
    nus = np.linspace(max(nu0 - cell, 0.25 * cell), nu0 + cell, cap)
    rss_all = np.array([_linear_fringe_solve(x, y, w, 2.0 * np.pi * nu)[1] for nu in nus])
    j = int(np.argmin(rss_all))
    if 0 < j < nus.size - 1:
        a, b, c = rss_all[j - 1], rss_all[j], rss_all[j + 1]
        denom = a - 2.0 * b + c
        shift = 0.5 * (a - c) / denom if denom > 0 else 0.0
        nu_best = nus[j] + shift * (nus[1] - nus[0])
    else:
        nu_best = nus[j]
    omega = 2.0 * np.pi * float(nu_best)

    if span * nu_best < 1.0:
        raise PreconditionError(
            f"scan covers {span * nu_best:.2f} fringe periods; need at least one"
        )

    coef, rss, A_norm = _linear_fringe_solve(x, y, w, omega)
    c0, c1, c2 = (float(v) for v in coef)
    amp_total = c0 - background
    if amp_total <= 0.0:
        raise PreconditionError("background estimate exceeds the fitted mean level")
    m = float(np.hypot(c1, c2))
    vis = m / amp_total
    phi = float(np.arctan2(-c2, c1))
    raw_vis = m / c0 if c0 > 0.0 else float("nan")

    # covariance of the linear coefficients; unweighted fits scale by the
    # residual variance, Poisson-weighted fits are already in count units
    dof = max(y.size - 3, 1)
    scale = rss / dof if not weighted else 1.0
    cov_lin = scale * np.linalg.inv(A_norm)
    # delta method for V = sqrt(c1^2+c2^2) / (c0 - B)
    if m > 0.0:
        gv = np.array([-m / amp_total**2, c1 / (m * amp_total), c2 / (m * amp_total)])
        var_v = float(gv @ cov_lin @ gv)
        gp = np.array([0.0, c2 / m**2, -c1 / m**2])
        var_phi = float(gp @ cov_lin @ gp)
    else:
        var_v = float("nan")
        var_phi = float("nan")

    params = {
        "mean_level": c0,
        "amplitude": amp_total,
        "background": background,
        "visibility": vis,
        "phase": phi,
        "carrier": omega,
        "raw_visibility": raw_vis,
    }
    units = {
        "mean_level": "counts",
        "amplitude": "counts",
        "background": "counts",
        "visibility": "",
        "phase": "rad",
        "carrier": "rad per scan unit",
        "raw_visibility": "",
    }
    cov_diag = {
        "mean_level": float(cov_lin[0, 0]),
        "visibility": var_v,
        "phase": var_phi,
    }
    return FitResult(
        parameters=params,
        units=units,
        covariance_diag=cov_diag,
        residual_norm=float(np.sqrt(rss)),
        converged=True,
        iterations=cap,
        flags={"classical_bound_exceeded": bool(vis > CLASSICAL_VISIBILITY_BOUND)},
        cost_trace=(rss,),
    )


# ---------------------------------------------------------------------------
# calibration fit
# ---------------------------------------------------------------------------

def fit_linear_calibration(points) -> FitResult:
    """Ordinary least squares line through (wavelength nm, time ns) pairs."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise PreconditionError("need at least two (wavelength, time) pairs")
    lam, t = arr[:, 0], arr[:, 1]
    if np.unique(lam).size < 2:
        raise PreconditionError("all wavelengths identical; slope is undefined")
    X = np.column_stack([lam, np.ones_like(lam)])
    coef, *_ = np.linalg.lstsq(X, t, rcond=None)
    r = X @ coef - t
    rss = float(r @ r)
    dof = arr.shape[0] - 2
    scale = rss / dof if dof > 0 else 0.0
    cov = scale * np.linalg.inv(X.T @ X)
    params = {"slope_ns_per_nm": float(coef[0]), "intercept_ns": float(coef[1])}
    units = {"slope_ns_per_nm": "ns/nm", "intercept_ns": "ns"}
    cov_diag = {"slope_ns_per_nm": float(cov[0, 0]), "intercept_ns": float(cov[1, 1])}
    return FitResult(
        parameters=params,
        units=units,
        covariance_diag=cov_diag,
        residual_norm=float(np.sqrt(rss)),
        converged=True,
        iterations=1,
        cost_trace=(rss,),
    )
