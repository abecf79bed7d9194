"""Minimal deterministic SVG line charts (no plotting dependency)."""
from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 130, 40, 60
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
N_TICKS = 5


def _num(v: float) -> str:
    return f"{v:.2f}"


def _label(v: float) -> str:
    if abs(v) >= 1e5:
        return f"{v:.3g}"
    return f"{v:.6g}"


def _span(lo, hi):
    if hi == lo:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    return lo, hi


def line_chart(series: dict, x_label: str, y_label: str, title: str = "") -> str:
    """Render ``{name: [(x, y), ...]}`` as one polyline per series."""
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x0, x1 = _span(min(xs), max(xs))
    y0, y1 = _span(min(0.0, min(ys)), max(ys))
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MARGIN_T + ph - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="14">{escape(title)}</text>')
    bottom, right = MARGIN_T + ph, MARGIN_L + pw
    out.append(f'<line x1="{MARGIN_L}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>')
    out.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{bottom}" stroke="black"/>')
    for i in range(N_TICKS + 1):
        xv = x0 + (x1 - x0) * i / N_TICKS
        yv = y0 + (y1 - y0) * i / N_TICKS
        out.append(f'<text x="{_num(sx(xv))}" y="{bottom + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="10">{_label(xv)}</text>')
        out.append(f'<text x="{MARGIN_L - 6}" y="{_num(sy(yv) + 3)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="10">{_label(yv)}</text>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">{escape(x_label)}</text>')
    out.append(f'<text x="18" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12" '
               f'transform="rotate(-90 18 {MARGIN_T + ph / 2:.1f})">{escape(y_label)}</text>')
    for i, (name, pts) in enumerate(series.items()):
        colour = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{_num(sx(x))},{_num(sy(y))}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" '
                   f'points="{coords}"><title>{escape(str(name))}</title></polyline>')
        out.append(f'<text x="{right + 10}" y="{MARGIN_T + 14 * (i + 1)}" fill="{colour}" '
                   f'font-family="sans-serif" font-size="11">{escape(str(name))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
