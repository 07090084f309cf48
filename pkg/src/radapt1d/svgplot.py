"""Minimal SVG line plots: axes, optional log-log scales, legend.

Plots are a convenience output of the experiment drivers; the CSV files are
the contract.  Each data series becomes exactly one ``<polyline>`` element,
which the tests check structurally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .errors import InvalidParameterError

_PALETTE = ("#000000", "#c0392b", "#2b6cb0", "#2f855a", "#805ad5", "#b7791f")
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 28, 44


@dataclass
class Series:
    name: str
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape or self.x.ndim != 1 or self.x.size == 0:
            raise InvalidParameterError("series needs matching nonempty 1D x and y")


def _nice_ticks(lo, hi, target=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _log_ticks(lo, hi):
    ticks = [10.0**k for k in range(math.ceil(math.log10(lo) - 1e-9), math.floor(math.log10(hi) + 1e-9) + 1)]
    if len(ticks) < 2:
        ticks = [lo, hi]
    return ticks


def _fmt(v):
    if v == 0.0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:g}"


def line_plot(series, xlabel="", ylabel="", title="", loglog=False, width=640, height=480):
    """Render the series to an SVG document string."""
    if not series:
        raise InvalidParameterError("nothing to plot")
    xs = np.concatenate([s.x for s in series])
    ys = np.concatenate([s.y for s in series])
    if loglog and (np.any(xs <= 0.0) or np.any(ys <= 0.0)):
        raise InvalidParameterError("log-log plots need strictly positive data")

    def txf(v):
        return np.log10(v) if loglog else np.asarray(v, dtype=float)

    x_lo, x_hi = float(np.min(txf(xs))), float(np.max(txf(xs)))
    y_lo, y_hi = float(np.min(txf(ys))), float(np.max(txf(ys)))
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad_x, pad_y = 0.03 * (x_hi - x_lo), 0.06 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - pad_x, x_hi + pad_x
    y_lo, y_hi = y_lo - pad_y, y_hi + pad_y

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def px(v):
        return _MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def py(v):
        return _MARGIN_T + (y_hi - v) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#333333"/>',
    ]

    if loglog:
        x_ticks = [(math.log10(t), t) for t in _log_ticks(10.0**x_lo, 10.0**x_hi) if x_lo <= math.log10(t) <= x_hi]
        y_ticks = [(math.log10(t), t) for t in _log_ticks(10.0**y_lo, 10.0**y_hi) if y_lo <= math.log10(t) <= y_hi]
    else:
        x_ticks = [(t, t) for t in _nice_ticks(x_lo, x_hi)]
        y_ticks = [(t, t) for t in _nice_ticks(y_lo, y_hi)]

    for pos, label in x_ticks:
        x = px(pos)
        out.append(f'<line x1="{x:.2f}" y1="{_MARGIN_T + plot_h}" x2="{x:.2f}" '
                   f'y2="{_MARGIN_T + plot_h + 5}" stroke="#333333"/>')
        out.append(f'<text x="{x:.2f}" y="{_MARGIN_T + plot_h + 18}" font-size="11" '
                   f'text-anchor="middle">{escape(_fmt(label))}</text>')
    for pos, label in y_ticks:
        y = py(pos)
        out.append(f'<line x1="{_MARGIN_L - 5}" y1="{y:.2f}" x2="{_MARGIN_L}" '
                   f'y2="{y:.2f}" stroke="#333333"/>')
        out.append(f'<text x="{_MARGIN_L - 8}" y="{y + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{escape(_fmt(label))}</text>')

    if title:
        out.append(f'<text x="{width / 2:.1f}" y="18" font-size="13" '
                   f'text-anchor="middle">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{height - 8}" font-size="12" '
                   f'text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        yx, yy = 16, _MARGIN_T + plot_h / 2
        out.append(f'<text x="{yx}" y="{yy:.1f}" font-size="12" text-anchor="middle" '
                   f'transform="rotate(-90 {yx} {yy:.1f})">{escape(ylabel)}</text>')

    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(u):.2f},{py(v):.2f}" for u, v in zip(txf(s.x), txf(s.y)))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _MARGIN_T + 14 + 16 * i
        lx = _MARGIN_L + plot_w - 130
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{lx + 28}" y="{ly}" font-size="11">{escape(s.name)}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
