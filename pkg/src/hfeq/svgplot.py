"""Minimal deterministic SVG rendering for scenario outputs.

Only two chart kinds are needed downstream — line plots for spectra,
fringes and curves, and heatmaps for joint spectra — so this stays a few
hundred lines of plain SVG emission instead of pulling in a plotting
stack.  Everything is rendered with fixed formatting (no timestamps, no
randomized ids) so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

__all__ = ["line_plot", "heatmap"]

_WIDTH = 720
_HEIGHT = 480
# left margin fits 8-char tick labels at 12 px; bottom fits label + title row
_MARGIN = (70.0, 20.0, 42.0, 58.0)  # left, right, top, bottom

_PALETTE = (
    "#2464b4",
    "#c8401e",
    "#2e8b57",
    "#7d3cb4",
    "#c88a1e",
    "#4ab4c8",
)

_FONT = "font-family=\"Helvetica,Arial,sans-serif\""

# dark-violet -> magenta -> orange -> pale-yellow ramp for heatmaps
_RAMP = (
    (0.00, (13, 8, 68)),
    (0.25, (114, 31, 129)),
    (0.50, (205, 62, 78)),
    (0.75, (246, 146, 28)),
    (1.00, (252, 245, 164)),
)


def _fmt(x: float) -> str:
    """Fixed-width-ish numeric formatting for coordinates and labels."""
    if x == 0.0:
        return "0"
    return f"{x:.6g}"


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Tick positions on a 1-2-5 ladder covering [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0]
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(target, 2)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * mag
        if raw <= step:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 0.5 * step:
        # snap near-zero accumulation error so labels read "0", not "1e-17"
        if abs(t) < 1e-9 * step:
            t = 0.0
        ticks.append(t)
        t += step
    return ticks


def _pad_range(lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        pad = 1.0 if lo == 0.0 else abs(lo) * 0.05
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.04
    return lo - pad, hi + pad


class _Canvas:
    """Accumulates SVG fragments for one fixed-size chart."""

    def __init__(self, title: str, xlabel: str, ylabel: str) -> None:
        self.parts: list[str] = []
        left, right, top, bottom = _MARGIN
        self.x0 = left
        self.y0 = top
        self.x1 = _WIDTH - right
        self.y1 = _HEIGHT - bottom
        self.parts.append(
            f"<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{_WIDTH}\" "
            f"height=\"{_HEIGHT}\" viewBox=\"0 0 {_WIDTH} {_HEIGHT}\">"
        )
        self.parts.append(
            f"<rect x=\"0\" y=\"0\" width=\"{_WIDTH}\" height=\"{_HEIGHT}\" fill=\"#ffffff\"/>"
        )
        if title:
            self.parts.append(
                f"<text x=\"{_WIDTH / 2:g}\" y=\"24\" text-anchor=\"middle\" "
                f"{_FONT} font-size=\"15\" fill=\"#202020\">{_esc(title)}</text>"
            )
        self.xlabel = xlabel
        self.ylabel = ylabel

    def map_x(self, v: float, lo: float, hi: float) -> float:
        return self.x0 + (v - lo) / (hi - lo) * (self.x1 - self.x0)

    def map_y(self, v: float, lo: float, hi: float) -> float:
        return self.y1 - (v - lo) / (hi - lo) * (self.y1 - self.y0)

    def axes(self, xlo: float, xhi: float, ylo: float, yhi: float) -> None:
        p = self.parts
        for t in _nice_ticks(xlo, xhi):
            px = self.map_x(t, xlo, xhi)
            p.append(
                f"<line x1=\"{px:.2f}\" y1=\"{self.y1:.2f}\" x2=\"{px:.2f}\" "
                f"y2=\"{self.y1 + 5:.2f}\" stroke=\"#404040\" stroke-width=\"1\"/>"
            )
            p.append(
                f"<text x=\"{px:.2f}\" y=\"{self.y1 + 19:.2f}\" text-anchor=\"middle\" "
                f"{_FONT} font-size=\"11\" fill=\"#404040\">{_fmt(t)}</text>"
            )
        for t in _nice_ticks(ylo, yhi):
            py = self.map_y(t, ylo, yhi)
            p.append(
                f"<line x1=\"{self.x0 - 5:.2f}\" y1=\"{py:.2f}\" x2=\"{self.x0:.2f}\" "
                f"y2=\"{py:.2f}\" stroke=\"#404040\" stroke-width=\"1\"/>"
            )
            p.append(
                f"<text x=\"{self.x0 - 8:.2f}\" y=\"{py + 4:.2f}\" text-anchor=\"end\" "
                f"{_FONT} font-size=\"11\" fill=\"#404040\">{_fmt(t)}</text>"
            )
        p.append(
            f"<rect x=\"{self.x0:.2f}\" y=\"{self.y0:.2f}\" "
            f"width=\"{self.x1 - self.x0:.2f}\" height=\"{self.y1 - self.y0:.2f}\" "
            f"fill=\"none\" stroke=\"#202020\" stroke-width=\"1\"/>"
        )
        if self.xlabel:
            p.append(
                f"<text x=\"{(self.x0 + self.x1) / 2:.2f}\" y=\"{self.y1 + 40:.2f}\" "
                f"text-anchor=\"middle\" {_FONT} font-size=\"13\" "
                f"fill=\"#202020\">{_esc(self.xlabel)}</text>"
            )
        if self.ylabel:
            cx = self.x0 - 52
            cy = (self.y0 + self.y1) / 2
            p.append(
                f"<text x=\"{cx:.2f}\" y=\"{cy:.2f}\" text-anchor=\"middle\" {_FONT} "
                f"font-size=\"13\" fill=\"#202020\" "
                f"transform=\"rotate(-90 {cx:.2f} {cy:.2f})\">{_esc(self.ylabel)}</text>"
            )

    def finish(self) -> str:
        return "\n".join(self.parts) + "\n</svg>\n"


def _esc(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def line_plot(
    path,
    x: np.ndarray,
    series: Sequence[tuple[str, np.ndarray]],
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> None:
    """Write a multi-series line chart to ``path``.

    ``series`` is an ordered list of ``(label, y-array)`` pairs sharing the
    ``x`` axis; labels feed a legend in draw order.
    """
    x = np.asarray(x, dtype=float)
    ys = [(label, np.asarray(y, dtype=float)) for label, y in series]
    if x.size < 2 or not ys:
        raise ValueError("line_plot needs >= 2 x samples and >= 1 series")
    for label, y in ys:
        if y.shape != x.shape:
            raise ValueError(f"series {label!r} length does not match x")
    xlo, xhi = _pad_range(float(x.min()), float(x.max()))
    all_y = np.concatenate([y for _, y in ys])
    finite = all_y[np.isfinite(all_y)]
    if finite.size == 0:
        raise ValueError("no finite samples to plot")
    ylo, yhi = _pad_range(float(finite.min()), float(finite.max()))

    cv = _Canvas(title, xlabel, ylabel)
    cv.axes(xlo, xhi, ylo, yhi)
    for i, (label, y) in enumerate(ys):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(
            f"{cv.map_x(float(xv), xlo, xhi):.2f},{cv.map_y(float(yv), ylo, yhi):.2f}"
            for xv, yv in zip(x, y)
            if math.isfinite(yv)
        )
        cv.parts.append(
            f"<polyline points=\"{pts}\" fill=\"none\" stroke=\"{color}\" "
            f"stroke-width=\"1.6\"/>"
        )
        if len(ys) > 1 or label:
            lx = cv.x0 + 10
            ly = cv.y0 + 16 + 16 * i
            cv.parts.append(
                f"<line x1=\"{lx:.2f}\" y1=\"{ly - 4:.2f}\" x2=\"{lx + 22:.2f}\" "
                f"y2=\"{ly - 4:.2f}\" stroke=\"{color}\" stroke-width=\"2\"/>"
            )
            cv.parts.append(
                f"<text x=\"{lx + 28:.2f}\" y=\"{ly:.2f}\" {_FONT} font-size=\"12\" "
                f"fill=\"#202020\">{_esc(label)}</text>"
            )
    _write(path, cv.finish())


def _ramp_color(v: float) -> str:
    """Map v in [0, 1] onto the fixed color ramp."""
    v = min(max(v, 0.0), 1.0)
    for (p0, c0), (p1, c1) in zip(_RAMP, _RAMP[1:]):
        if v <= p1:
            f = (v - p0) / (p1 - p0)
            r = round(c0[0] + f * (c1[0] - c0[0]))
            g = round(c0[1] + f * (c1[1] - c0[1]))
            b = round(c0[2] + f * (c1[2] - c0[2]))
            return f"#{r:02x}{g:02x}{b:02x}"
    r, g, b = _RAMP[-1][1]
    return f"#{r:02x}{g:02x}{b:02x}"


def _downsample(z: np.ndarray, limit: int) -> np.ndarray:
    """Block-average rows/columns down to <= limit per axis."""
    out = np.asarray(z, dtype=float)
    for axis in (0, 1):
        n = out.shape[axis]
        if n <= limit:
            continue
        block = -(-n // limit)  # ceil division
        pad = (-n) % block
        if pad:
            pad_width = [(0, 0), (0, 0)]
            pad_width[axis] = (0, pad)
            out = np.pad(out, pad_width, mode="edge")
        if axis == 0:
            out = out.reshape(out.shape[0] // block, block, out.shape[1]).mean(axis=1)
        else:
            out = out.reshape(out.shape[0], out.shape[1] // block, block).mean(axis=2)
    return out


def heatmap(
    path,
    x: np.ndarray,
    y: np.ndarray,
    z: np.ndarray,
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    max_cells: int = 160,
) -> None:
    """Write a 2-D intensity map to ``path``.

    ``z`` is indexed [row = y, col = x].  The grid is block-averaged to at
    most ``max_cells`` per axis and adjacent same-color cells in each row
    are merged into single rects to keep files small.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.shape != (y.size, x.size):
        raise ValueError("z must have shape (len(y), len(x))")
    zs = _downsample(z, max_cells)
    zmax = float(zs.max())
    if zmax <= 0.0:
        zmax = 1.0
    # quantize to 64 levels -> long same-color runs merge into few rects
    levels = np.clip((zs / zmax * 63.0).round(), 0, 63).astype(int)

    xlo, xhi = float(x.min()), float(x.max())
    ylo, yhi = float(y.min()), float(y.max())
    cv = _Canvas(title, xlabel, ylabel)
    nrow, ncol = levels.shape
    cell_w = (cv.x1 - cv.x0) / ncol
    cell_h = (cv.y1 - cv.y0) / nrow
    colors = [_ramp_color(k / 63.0) for k in range(64)]
    for i in range(nrow):
        py = cv.y1 - (i + 1) * cell_h
        j = 0
        while j < ncol:
            k = j + 1
            while k < ncol and levels[i, k] == levels[i, j]:
                k += 1
            px = cv.x0 + j * cell_w
            w = (k - j) * cell_w
            cv.parts.append(
                f"<rect x=\"{px:.2f}\" y=\"{py:.2f}\" width=\"{w + 0.05:.2f}\" "
                f"height=\"{cell_h + 0.05:.2f}\" fill=\"{colors[levels[i, j]]}\"/>"
            )
            j = k
    cv.axes(xlo, xhi, ylo, yhi)
    _write(path, cv.finish())


def _write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
