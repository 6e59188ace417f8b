"""Minimal SVG scatter plots built from primitive elements."""

import numpy as np

WIDTH, HEIGHT, PAD = 480, 480, 40
MAX_MARKERS = 6000
PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]


def _thin(P):
    if P.shape[0] <= MAX_MARKERS:
        return P
    return P[np.linspace(0, P.shape[0] - 1, MAX_MARKERS).astype(int)]


def scatter_svg(layers, title="", lines=()):
    """SVG text for 2-D point layers.

    Parameters
    ----------
    layers : list of (label, points)
        Each ``points`` array has shape ``(N, 2)``; layers get distinct colours.
    lines : sequence of (a, rho)
        Lines ``a^T x = rho`` drawn across the plot (e.g. guard boundaries).
    """
    pts = [np.asarray(P, dtype=float).reshape(-1, 2) for _, P in layers]
    allp = np.vstack(pts) if pts and sum(len(p) for p in pts) else np.zeros((1, 2))
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo, hi = lo - 0.05 * span, hi + 0.05 * span
    span = hi - lo

    def sx(x):
        return PAD + (x - lo[0]) / span[0] * (WIDTH - 2 * PAD)

    def sy(y):
        return HEIGHT - PAD - (y - lo[1]) / span[1] * (HEIGHT - 2 * PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{PAD / 2}" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{PAD}" y="{HEIGHT - PAD / 3}" font-size="10">x1: [{lo[0]:.3g}, {hi[0]:.3g}]</text>',
        f'<text x="{WIDTH - PAD}" y="{HEIGHT - PAD / 3}" text-anchor="end" font-size="10">x2: [{lo[1]:.3g}, {hi[1]:.3g}]</text>',
    ]
    for a, rho in lines:
        a = np.asarray(a, dtype=float)
        if abs(a[1]) > abs(a[0]):
            xs = np.array([lo[0], hi[0]])
            ys = (rho - a[0] * xs) / a[1]
        else:
            ys = np.array([lo[1], hi[1]])
            xs = (rho - a[1] * ys) / a[0]
        out.append(
            f'<line x1="{sx(xs[0]):.2f}" y1="{sy(ys[0]):.2f}" x2="{sx(xs[1]):.2f}" y2="{sy(ys[1]):.2f}" '
            'stroke="green" stroke-width="1.5"/>'
        )
    for i, ((label, _), P) in enumerate(zip(layers, pts)):
        color = PALETTE[i % len(PALETTE)]
        d = "".join(f"M{sx(x):.2f} {sy(y):.2f}h0" for x, y in _thin(P))
        out.append(f'<path d="{d}" stroke="{color}" stroke-width="2.5" stroke-linecap="round" fill="none"/>')
        out.append(f'<text x="{PAD + 5}" y="{PAD + 14 * (i + 1)}" font-size="11" fill="{color}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, layers, title="", lines=()):
    with open(path, "w") as fh:
        fh.write(scatter_svg(layers, title, lines))
