"""Minimal deterministic SVG plots.

Hand-rolled line, stem, and pole-zero renderings with a fixed layout and
fixed-precision coordinate formatting, so identical data yields
byte-identical files (golden-file friendly). Not a plotting library; just
enough to carry the report figures.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ValidationError

__all__ = ["line_plot", "stem_plot", "pole_zero_plot"]

_W, _H = 720.0, 480.0
_ML, _MR, _MT, _MB = 70.0, 20.0, 36.0, 48.0
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fnum(x: float) -> str:
    return f"{float(x):.6g}"


def _fpix(x: float) -> str:
    return f"{float(x):.2f}"


def _limits(values: np.ndarray):
    lo = float(np.min(values))
    hi = float(np.max(values))
    if lo == hi:
        pad = 1.0 if lo == 0.0 else abs(lo) * 0.1
        lo, hi = lo - pad, hi + pad
    return lo, hi


class _Axes:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim

    def px(self, x):
        return _ML + (np.asarray(x, float) - self.x0) / (self.x1 - self.x0) * (
            _W - _ML - _MR
        )

    def py(self, y):
        return _H - _MB - (np.asarray(y, float) - self.y0) / (self.y1 - self.y0) * (
            _H - _MT - _MB
        )


def _header(title: str) -> list:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(_W)}" height="{int(_H)}"'
        f' viewBox="0 0 {int(_W)} {int(_H)}">',
        f'<rect width="{int(_W)}" height="{int(_H)}" fill="white"/>',
        f'<text x="{_fpix(_W / 2)}" y="22" text-anchor="middle"'
        f' font-family="monospace" font-size="14">{_escape(title)}</text>',
    ]


def _escape(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _axes_frame(ax: _Axes, xlabel: str, ylabel: str) -> list:
    parts = [
        f'<rect x="{_fpix(_ML)}" y="{_fpix(_MT)}" width="{_fpix(_W - _ML - _MR)}"'
        f' height="{_fpix(_H - _MT - _MB)}" fill="none" stroke="black"/>'
    ]
    for i in range(5):
        fx = ax.x0 + (ax.x1 - ax.x0) * i / 4
        px = float(ax.px(fx))
        parts.append(
            f'<line x1="{_fpix(px)}" y1="{_fpix(_H - _MB)}" x2="{_fpix(px)}"'
            f' y2="{_fpix(_H - _MB + 5)}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_fpix(px)}" y="{_fpix(_H - _MB + 18)}" text-anchor="middle"'
            f' font-family="monospace" font-size="11">{_fnum(fx)}</text>'
        )
        fy = ax.y0 + (ax.y1 - ax.y0) * i / 4
        py = float(ax.py(fy))
        parts.append(
            f'<line x1="{_fpix(_ML - 5)}" y1="{_fpix(py)}" x2="{_fpix(_ML)}"'
            f' y2="{_fpix(py)}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_fpix(_ML - 8)}" y="{_fpix(py + 4)}" text-anchor="end"'
            f' font-family="monospace" font-size="11">{_fnum(fy)}</text>'
        )
    parts.append(
        f'<text x="{_fpix(_ML + (_W - _ML - _MR) / 2)}" y="{_fpix(_H - 10)}"'
        f' text-anchor="middle" font-family="monospace" font-size="12">'
        f"{_escape(xlabel)}</text>"
    )
    parts.append(
        f'<text x="16" y="{_fpix(_MT + (_H - _MT - _MB) / 2)}" text-anchor="middle"'
        f' font-family="monospace" font-size="12" transform="rotate(-90 16'
        f' {_fpix(_MT + (_H - _MT - _MB) / 2)})">{_escape(ylabel)}</text>'
    )
    return parts


def line_plot(series, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """series: iterable of (x, y, label) triples sharing one axes box."""
    series = [(np.asarray(x, float), np.asarray(y, float), str(label))
              for x, y, label in series]
    if not series:
        raise ValidationError("line_plot needs at least one series")
    for x, y, _ in series:
        if x.size != y.size or x.size < 1:
            raise ValidationError("series x and y must be equal-length, non-empty")
    ax = _Axes(
        _limits(np.concatenate([s[0] for s in series])),
        _limits(np.concatenate([s[1] for s in series])),
    )
    parts = _header(title) + _axes_frame(ax, xlabel, ylabel)
    for i, (x, y, label) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(
            f"{_fpix(px)},{_fpix(py)}" for px, py in zip(ax.px(x), ax.py(y))
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}"'
            f' stroke-width="1.2"/>'
        )
        if label:
            ly = _MT + 16 + 14 * i
            parts.append(
                f'<line x1="{_fpix(_W - _MR - 120)}" y1="{_fpix(ly - 4)}"'
                f' x2="{_fpix(_W - _MR - 100)}" y2="{_fpix(ly - 4)}"'
                f' stroke="{color}" stroke-width="1.2"/>'
            )
            parts.append(
                f'<text x="{_fpix(_W - _MR - 95)}" y="{_fpix(ly)}"'
                f' font-family="monospace" font-size="11">{_escape(label)}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def stem_plot(orders, num_coeffs, den_coeffs, title: str = "",
              xlabel: str = "order", ylabel: str = "coefficient") -> str:
    """Signed stem pairs (numerator vs denominator) per sampled order."""
    x = np.asarray(orders, float)
    b = np.asarray(num_coeffs, float)
    a = np.asarray(den_coeffs, float)
    if not (x.size == b.size == a.size) or x.size < 1:
        raise ValidationError("stem_plot needs equal-length, non-empty arrays")
    ax = _Axes(_limits(x), _limits(np.concatenate([b, a, [0.0]])))
    parts = _header(title) + _axes_frame(ax, xlabel, ylabel)
    zero_y = float(ax.py(0.0))
    for xi, bi, ai in zip(x, b, a):
        pxb = float(ax.px(xi)) - 2.0
        pxa = float(ax.px(xi)) + 2.0
        parts.append(
            f'<line x1="{_fpix(pxb)}" y1="{_fpix(zero_y)}" x2="{_fpix(pxb)}"'
            f' y2="{_fpix(float(ax.py(bi)))}" stroke="{_PALETTE[0]}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<circle cx="{_fpix(pxb)}" cy="{_fpix(float(ax.py(bi)))}" r="2.5"'
            f' fill="{_PALETTE[0]}"/>'
        )
        parts.append(
            f'<line x1="{_fpix(pxa)}" y1="{_fpix(zero_y)}" x2="{_fpix(pxa)}"'
            f' y2="{_fpix(float(ax.py(ai)))}" stroke="{_PALETTE[1]}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<circle cx="{_fpix(pxa)}" cy="{_fpix(float(ax.py(ai)))}" r="2.5"'
            f' fill="{_PALETTE[1]}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def pole_zero_plot(poles, zeros, q, title: str = "") -> str:
    """w-plane scatter with the stability cone and sheet boundary rays."""
    poles = np.asarray(poles, complex)
    zeros = np.asarray(zeros, complex)
    allpts = np.concatenate([poles, zeros]) if zeros.size else poles
    if allpts.size == 0:
        raise ValidationError("nothing to plot")
    span = float(np.abs(allpts).max()) * 1.15 or 1.0
    ax = _Axes((-span, span), (-span, span))
    parts = _header(title) + _axes_frame(ax, "Re(w)", "Im(w)")
    qf = float(q)
    for angle, color in ((90.0 * qf, "#888888"), (180.0 * qf, "#bbbbbb")):
        for sign in (1.0, -1.0):
            rad = np.radians(angle) * sign
            ex = span * np.cos(rad)
            ey = span * np.sin(rad)
            parts.append(
                f'<line x1="{_fpix(float(ax.px(0)))}" y1="{_fpix(float(ax.py(0)))}"'
                f' x2="{_fpix(float(ax.px(ex)))}" y2="{_fpix(float(ax.py(ey)))}"'
                f' stroke="{color}" stroke-dasharray="4 3"/>'
            )
    for p in poles:
        cx, cy = float(ax.px(p.real)), float(ax.py(p.imag))
        parts.append(
            f'<path d="M {_fpix(cx - 4)} {_fpix(cy - 4)} L {_fpix(cx + 4)}'
            f' {_fpix(cy + 4)} M {_fpix(cx - 4)} {_fpix(cy + 4)} L {_fpix(cx + 4)}'
            f' {_fpix(cy - 4)}" stroke="{_PALETTE[1]}" stroke-width="1.5"/>'
        )
    for z in zeros:
        parts.append(
            f'<circle cx="{_fpix(float(ax.px(z.real)))}"'
            f' cy="{_fpix(float(ax.py(z.imag)))}" r="4" fill="none"'
            f' stroke="{_PALETTE[0]}" stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
