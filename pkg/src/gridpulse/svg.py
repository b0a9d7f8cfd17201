"""Minimal self-contained SVG line plots (polylines, axes, optional log scales)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

WIDTH, HEIGHT = 720, 420
LEFT, RIGHT, TOP, BOTTOM = 80, 20, 40, 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


@dataclass
class Line:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    band: np.ndarray | None = None  # +- half-width drawn as a shaded area


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        return [10.0**e for e in range(math.floor(lo), math.ceil(hi) + 1)]
    span = hi - lo or 1.0
    step = 10 ** math.floor(math.log10(span / 5))
    for m in (1, 2, 5, 10):
        if span / (step * m) <= 6:
            step *= m
            break
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step) + 1)]


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_plot(lines: list[Line], title: str, xlabel: str, ylabel: str,
              logx: bool = False, logy: bool = False) -> str:
    def tx(v):
        return np.log10(v) if logx else v

    def ty(v):
        return np.log10(v) if logy else v

    xs, ys = [], []
    for ln in lines:
        keep = np.isfinite(ln.y) & (ln.x > 0 if logx else True) & (ln.y > 0 if logy else True)
        xs.append(tx(ln.x[keep]))
        lo_hi = [ln.y[keep]]
        if ln.band is not None:
            lo_hi += [ln.y[keep] - np.nan_to_num(ln.band[keep]), ln.y[keep] + np.nan_to_num(ln.band[keep])]
        ys.append(ty(np.concatenate(lo_hi)) if not logy else ty(ln.y[keep]))
    allx = np.concatenate(xs) if xs else np.zeros(1)
    ally = np.concatenate(ys) if ys else np.zeros(1)
    allx = allx[np.isfinite(allx)]
    ally = ally[np.isfinite(ally)]
    x0, x1 = (allx.min(), allx.max()) if allx.size else (0.0, 1.0)
    y0, y1 = (ally.min(), ally.max()) if ally.size else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = WIDTH - LEFT - RIGHT
    ph = HEIGHT - TOP - BOTTOM

    def px(v):
        return LEFT + (v - x0) / (x1 - x0) * pw

    def py(v):
        return TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1, logx):
        if x0 <= t <= x1:
            label = _fmt(10**t) if logx else _fmt(t)
            out.append(f'<line x1="{px(t):.2f}" y1="{TOP + ph}" x2="{px(t):.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{px(t):.2f}" y="{TOP + ph + 18}" text-anchor="middle">{label}</text>')
    for t in _ticks(y0, y1, logy):
        if y0 <= t <= y1:
            label = _fmt(10**t) if logy else _fmt(t)
            out.append(f'<line x1="{LEFT - 5}" y1="{py(t):.2f}" x2="{LEFT}" y2="{py(t):.2f}" stroke="black"/>')
            out.append(f'<text x="{LEFT - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">{xlabel}</text>')
    out.append(
        f'<text x="18" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {TOP + ph / 2:.1f})">{ylabel}</text>'
    )
    for i, ln in enumerate(lines):
        color = COLORS[i % len(COLORS)]
        keep = np.isfinite(ln.y) & (ln.x > 0 if logx else True) & (ln.y > 0 if logy else True)
        x = tx(ln.x[keep])
        y = ty(ln.y[keep])
        if ln.band is not None and not logy:
            b = np.nan_to_num(ln.band[keep])
            upper = " ".join(f"{px(a):.2f},{py(c):.2f}" for a, c in zip(x, y + b))
            lower = " ".join(f"{px(a):.2f},{py(c):.2f}" for a, c in zip(x[::-1], (y - b)[::-1]))
            out.append(f'<polygon points="{upper} {lower}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        pts = " ".join(f"{px(a):.2f},{py(c):.2f}" for a, c in zip(x, y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>')
        if ln.label:
            out.append(f'<text x="{LEFT + pw - 10}" y="{TOP + 16 + 14 * i}" text-anchor="end" fill="{color}">{ln.label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
