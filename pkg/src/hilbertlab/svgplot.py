"""Tiny deterministic SVG emitter for curves and unit-ball glyph fields.

Hand-rolled on purpose: plotting libraries embed ids and metadata that
break byte-identical golden outputs.
"""

from __future__ import annotations

import numpy as np

from .reports import prepare_output

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
W, H = 720, 480
MARGIN = 56


def _fmt(x):
    return format(float(x), ".2f")


class _Canvas:
    def __init__(self, title):
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}">\n'
            f'<rect width="{W}" height="{H}" fill="white"/>\n'
            f'<text x="{W // 2}" y="20" text-anchor="middle" '
            f'font-family="monospace" font-size="14">{title}</text>\n']

    def add(self, s):
        self.parts.append(s)

    def write(self, path, force=False):
        prepare_output(path, force)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("".join(self.parts) + "</svg>\n")


class _Axes:
    def __init__(self, canvas, xlim, ylim):
        self.c = canvas
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 - self.x0 < 1e-12:
            self.x1 = self.x0 + 1.0
        if self.y1 - self.y0 < 1e-12:
            self.y1 = self.y0 + 1.0
        canvas.add(f'<rect x="{MARGIN}" y="{MARGIN}" width="{W - 2 * MARGIN}" '
                   f'height="{H - 2 * MARGIN}" fill="none" stroke="black"/>\n')
        for k in range(5):
            f = k / 4.0
            xv = self.x0 + f * (self.x1 - self.x0)
            yv = self.y0 + f * (self.y1 - self.y0)
            px = MARGIN + f * (W - 2 * MARGIN)
            py = H - MARGIN - f * (H - 2 * MARGIN)
            canvas.add(f'<text x="{_fmt(px)}" y="{H - MARGIN + 16}" '
                       f'text-anchor="middle" font-family="monospace" '
                       f'font-size="10">{format(xv, ".3g")}</text>\n')
            canvas.add(f'<text x="{MARGIN - 6}" y="{_fmt(py + 3)}" '
                       f'text-anchor="end" font-family="monospace" '
                       f'font-size="10">{format(yv, ".3g")}</text>\n')

    def px(self, x, y):
        fx = (x - self.x0) / (self.x1 - self.x0)
        fy = (y - self.y0) / (self.y1 - self.y0)
        return MARGIN + fx * (W - 2 * MARGIN), H - MARGIN - fy * (H - 2 * MARGIN)

    def polyline(self, xs, ys, color, width=1.5, dashed=False):
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in
                       (self.px(x, y) for x, y in zip(xs, ys)))
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        self.c.add(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="{width}"{dash}/>\n')

    def polygon(self, xs, ys, color, width=0.8):
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in
                       (self.px(x, y) for x, y in zip(xs, ys)))
        self.c.add(f'<polygon points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="{width}"/>\n')


def line_plot(path, series, title="", force=False):
    """series: ordered dict-like of label -> (xs, ys)."""
    items = list(series.items())
    all_x = np.concatenate([np.asarray(x) for _, (x, _) in items])
    all_y = np.concatenate([np.asarray(y) for _, (_, y) in items])
    canvas = _Canvas(title)
    ax = _Axes(canvas, (all_x.min(), all_x.max()), (all_y.min(), all_y.max()))
    for k, (label, (xs, ys)) in enumerate(items):
        color = PALETTE[k % len(PALETTE)]
        ax.polyline(np.asarray(xs), np.asarray(ys), color)
        canvas.add(f'<text x="{W - MARGIN - 4}" y="{MARGIN + 14 + 14 * k}" '
                   f'text-anchor="end" font-family="monospace" font-size="11" '
                   f'fill="{color}">{label}</text>\n')
    canvas.write(path, force=force)


def profile_plot(path, profile, title="chord profile", force=False):
    series = {
        "alpha": (profile.ts, profile.alpha),
        "alpha'": (profile.ts, profile.alpha_p),
        "alpha''": (profile.ts, profile.alpha_pp),
        "hB(dx,dx)": (profile.ts, profile.hb_chord),
    }
    line_plot(path, series, title=title, force=force)


def glyph_field(path, domain, solution, fld, stride=8, scale=0.35,
                title="Hilbert vs Blaschke unit balls", force=False):
    """Unit-ball glyphs: Hilbert ball (polygon) and Blaschke ellipse."""
    from .hilbert import hilbert_norm

    g = solution.grid
    canvas = _Canvas(title)
    lo, hi = domain.bbox()
    pad = 0.1
    ax = _Axes(canvas, (lo[0] - pad, hi[0] + pad), (lo[1] - pad, hi[1] + pad))
    bd = domain.sample_boundary(256)
    ax.polygon(bd[:, 0], bd[:, 1], "black", width=1.5)
    mask = fld.mask & g.eroded(3)
    thetas = np.linspace(0.0, 2.0 * np.pi, 33)
    size = scale * g.h * stride
    for i in range(0, g.n + 1, stride):
        for j in range(0, g.n + 1, stride):
            if not mask[i, j]:
                continue
            x, y = g.X[i, j], g.Y[i, j]
            rh = np.array([size / hilbert_norm(domain, (x, y),
                                               (np.cos(t), np.sin(t)))
                           for t in thetas])
            ax.polyline(x + rh * np.cos(thetas), y + rh * np.sin(thetas),
                        PALETTE[0], width=0.8)
            h11, h12, h22 = fld.hb[i, j]
            qb = (h11 * np.cos(thetas) ** 2 + 2 * h12 * np.cos(thetas) * np.sin(thetas)
                  + h22 * np.sin(thetas) ** 2)
            rb = size / np.sqrt(qb)
            ax.polyline(x + rb * np.cos(thetas), y + rb * np.sin(thetas),
                        PALETTE[1], width=0.8)
    canvas.add(f'<text x="{W - MARGIN - 4}" y="{MARGIN + 14}" text-anchor="end" '
               f'font-family="monospace" font-size="11" fill="{PALETTE[0]}">'
               f'Hilbert</text>\n')
    canvas.add(f'<text x="{W - MARGIN - 4}" y="{MARGIN + 28}" text-anchor="end" '
               f'font-family="monospace" font-size="11" fill="{PALETTE[1]}">'
               f'Blaschke</text>\n')
    canvas.write(path, force=force)
