"""Minimal static SVG rendering of a scree sequence with its change-point fit.

Hand-rolled markup, no plotting dependency; output is deterministic except
for the version comment on the second line.
"""

from __future__ import annotations

import numpy as np

from .stopping import ChangePointFit

_W, _H = 640, 420
_MARGIN = 50


def _fmt(v: float) -> str:
    return format(v, ".6g")


def render_scree_svg(scree, cp: ChangePointFit, version: str) -> str:
    s = np.asarray(scree, dtype=np.float64)
    L = s.shape[0]
    lo = float(s.min())
    hi = float(s.max())
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def px(x: float) -> float:
        return _MARGIN + (x / max(L - 1, 1)) * (_W - 2 * _MARGIN)

    def py(y: float) -> float:
        return _H - _MARGIN - ((y - lo) / (hi - lo)) * (_H - 2 * _MARGIN)

    def poly(xs, ys) -> str:
        return " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))

    t = cp.change_index
    b0, b1 = cp.left_coeffs
    c0, c1, c2 = cp.right_coeffs
    left_x = np.linspace(0, t, 2 * (t + 1))
    left_y = b0 + b1 * left_x
    right_x = np.linspace(t + 1, L - 1, max(2, 8 * (L - 1 - t)))
    right_y = c0 + c1 * right_x + c2 * right_x**2

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- riskrfe {version} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_W - _MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
        f'<text x="{_W // 2}" y="{_H - 12}" text-anchor="middle" '
        f'font-size="13">elimination cycle</text>',
        f'<text x="16" y="{_H // 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {_H // 2})">objective</text>',
        f'<polyline points="{poly(left_x, left_y)}" fill="none" '
        f'stroke="#1f6fb2" stroke-width="2"/>',
        f'<polyline points="{poly(right_x, right_y)}" fill="none" '
        f'stroke="#b2341f" stroke-width="2"/>',
    ]
    for k in range(L):
        lines.append(
            f'<circle cx="{_fmt(px(k))}" cy="{_fmt(py(float(s[k])))}" r="3.5" '
            f'fill="none" stroke="black"/>'
        )
    lines.append(
        f'<circle cx="{_fmt(px(t))}" cy="{_fmt(py(float(s[t])))}" r="6" fill="black"/>'
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
