"""Minimal log-log line plots written directly as SVG text.

Output is a pure function of the input data, so repeated runs produce
byte-identical files.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["loglog_svg", "write_loglog_svg"]

WIDTH, HEIGHT = 640, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 20, 40, 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _decades(lo, hi):
    a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
    if a == b:
        b = a + 1
    return a, b


def loglog_svg(series, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """SVG document for ``series = [(label, xs, ys), ...]`` on log-log axes.

    Nonpositive or non-finite points are dropped.
    """
    cleaned = []
    for label, xs, ys in series:
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        ok = (xs > 0) & (ys > 0) & np.isfinite(xs) & np.isfinite(ys)
        cleaned.append((label, xs[ok], ys[ok]))
    allx = np.concatenate([c[1] for c in cleaned]) if cleaned else np.array([])
    ally = np.concatenate([c[2] for c in cleaned]) if cleaned else np.array([])
    if allx.size == 0:
        allx, ally = np.array([1.0, 10.0]), np.array([1.0, 10.0])
    x0, x1 = _decades(allx.min(), allx.max())
    y0, y1 = _decades(ally.min(), ally.max())
    pw, ph = WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B

    def px(x):
        return MARGIN_L + (math.log10(x) - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN_T + ph - (math.log10(y) - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for d in range(x0, x1 + 1):
        x = px(10.0**d)
        out.append(f'<line x1="{x:.2f}" y1="{MARGIN_T}" x2="{x:.2f}" y2="{MARGIN_T + ph}" stroke="#dddddd"/>')
        out.append(f'<text x="{x:.2f}" y="{MARGIN_T + ph + 18}" font-size="12" text-anchor="middle">1e{d}</text>')
    for d in range(y0, y1 + 1):
        y = py(10.0**d)
        out.append(f'<line x1="{MARGIN_L}" y1="{y:.2f}" x2="{MARGIN_L + pw}" y2="{y:.2f}" stroke="#dddddd"/>')
        out.append(f'<text x="{MARGIN_L - 6}" y="{y + 4:.2f}" font-size="12" text-anchor="end">1e{d}</text>')
    for i, (label, xs, ys) in enumerate(cleaned):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = MARGIN_T + 16 + 16 * i
        out.append(
            f'<text x="{MARGIN_L + pw - 8}" y="{ly}" font-size="12" text-anchor="end" fill="{color}">{escape(label)}</text>'
        )
    out.append(f'<text x="{WIDTH / 2:.1f}" y="24" font-size="14" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 16}" font-size="13" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="18" y="{MARGIN_T + ph / 2:.1f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 18 {MARGIN_T + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_loglog_svg(path, series, title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(loglog_svg(series, title, xlabel, ylabel))
