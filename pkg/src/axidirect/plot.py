"""Minimal SVG line and scatter plots: axes, ticks, polylines and a legend."""

from pathlib import Path

import numpy as np

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    step = 10 ** np.floor(np.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (m * step) <= n:
            step *= m
            break
    return list(np.arange(np.ceil(lo / step) * step, hi + 0.5 * step, step))


def svg_plot(path, series, xlabel="", ylabel="", title="", scatter=False, width=640, height=420):
    """series: list of (label, x, y).  Non-finite points are skipped."""
    ml, mr, mt, mb = 70, 20, 30, 50
    xs = np.concatenate([np.asarray(s[1], float) for s in series]) if series else np.zeros(1)
    ys = np.concatenate([np.asarray(s[2], float) for s in series]) if series else np.zeros(1)
    ok = np.isfinite(xs) & np.isfinite(ys)
    x0, x1 = (xs[ok].min(), xs[ok].max()) if ok.any() else (0.0, 1.0)
    y0, y1 = (ys[ok].min(), ys[ok].max()) if ok.any() else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    W, H = width - ml - mr, height - mt - mb

    def X(v):
        return ml + (v - x0) / (x1 - x0) * W

    def Y(v):
        return mt + (1 - (v - y0) / (y1 - y0)) * H

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect x="{ml}" y="{mt}" width="{W}" height="{H}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{X(t):.1f}" y1="{mt + H}" x2="{X(t):.1f}" y2="{mt + H + 4}" stroke="black"/>')
        out.append(f'<text x="{X(t):.1f}" y="{mt + H + 16}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{ml - 4}" y1="{Y(t):.1f}" x2="{ml}" y2="{Y(t):.1f}" stroke="black"/>')
        out.append(f'<text x="{ml - 6}" y="{Y(t) + 4:.1f}" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{ml + W / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="14" y="{mt + H / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {mt + H / 2})">{ylabel}</text>')
    if title:
        out.append(f'<text x="{ml + W / 2}" y="18" text-anchor="middle">{title}</text>')
    for k, (label, x, y) in enumerate(series):
        c = COLORS[k % len(COLORS)]
        x, y = np.asarray(x, float), np.asarray(y, float)
        m = np.isfinite(x) & np.isfinite(y)
        pts = [(X(a), Y(b)) for a, b in zip(x[m], y[m])]
        if scatter:
            out += [f'<circle cx="{a:.1f}" cy="{b:.1f}" r="2.5" fill="{c}"/>' for a, b in pts]
        elif pts:
            s = " ".join(f"{a:.1f},{b:.1f}" for a, b in pts)
            out.append(f'<polyline points="{s}" fill="none" stroke="{c}" stroke-width="1.5"/>')
        out.append(f'<text x="{ml + W - 6}" y="{mt + 14 + 14 * k}" text-anchor="end" fill="{c}">{label}</text>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path
