"""CSV and SVG rendering of spectra (horn level curves and range points)."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .horns import boundary_curve, classify

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def horn_layers(horns, n_c=16, clip=4.0):
    """(label, shape, horn index, c, points) for every level curve of every horn."""
    layers = []
    for k, (t, h) in enumerate(horns):
        shape = classify(h)
        if h.degenerate:
            layers.append((t, shape, k, h.a, np.array([h.z1])))
            continue
        levels = [h.a] if h.a == h.b else list(np.linspace(h.a, h.b, n_c))
        scale = abs(h.z1 - h.z2)
        centre = 0.5 * (h.z1 + h.z2)
        for c in levels:
            pts = boundary_curve(h, c).points
            pts = pts[np.abs(pts - centre) <= clip * scale]
            pts = np.concatenate([[h.z1], pts, [h.z2]])
            layers.append((t, shape, k, float(c), pts))
    return layers


def write_spectra_csv(path, layers, range_points=()):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "c"])
        for _, _, _, c, pts in layers:
            for z in pts:
                w.writerow([f"{z.real:.12g}", f"{z.imag:.12g}", f"{c:.12g}"])
        for z in np.asarray(range_points, dtype=complex):
            w.writerow([f"{z.real:.12g}", f"{z.imag:.12g}", ""])


def write_spectra_svg(path, layers, range_points=(), size=480, title="spectrum"):
    """Deterministic SVG: one path per level curve, range points as dots, a legend per horn."""
    rng = np.asarray(range_points, dtype=complex)
    allpts = [p for *_, p in layers] + [rng]
    allpts = np.concatenate([np.asarray(p, dtype=complex) for p in allpts]) if allpts else np.zeros(1, complex)
    if allpts.size == 0:
        allpts = np.zeros(1, dtype=complex)
    x0, x1 = allpts.real.min(), allpts.real.max()
    y0, y1 = allpts.imag.min(), allpts.imag.max()
    span = max(x1 - x0, y1 - y0, 1e-9)
    pad = 0.08 * span
    x0, y1 = x0 - pad, y1 + pad
    scale = size / (span + 2 * pad)

    def xy(z):
        return (z.real - x0) * scale, (y1 - z.imag) * scale

    legend_h = 18 * (len({k for _, _, k, _, _ in layers}) + 1)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size + legend_h}" '
        f'viewBox="0 0 {size} {size + legend_h}">',
        f"<title>{title}</title>",
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white" stroke="#999"/>',
    ]
    seen = {}
    for t, shape, k, c, pts in layers:
        color = PALETTE[k % len(PALETTE)]
        seen.setdefault(k, (t, shape, color))
        if pts.size == 1:
            x, y = xy(pts[0])
            out.append(f'<circle class="level" data-c="{c:.6g}" cx="{x:.3f}" cy="{y:.3f}" r="3" fill="{color}"/>')
            continue
        coords = [xy(z) for z in pts]
        d = "M " + " L ".join(f"{x:.3f} {y:.3f}" for x, y in coords)
        out.append(f'<path class="level" data-c="{c:.6g}" d="{d}" fill="none" stroke="{color}" stroke-width="1"/>')
    for z in rng:
        x, y = xy(z)
        out.append(f'<circle class="range" cx="{x:.3f}" cy="{y:.3f}" r="1.5" fill="black"/>')
    yl = size + 14
    for k, (t, shape, color) in sorted(seen.items()):
        t = complex(np.round(complex(t), 12)) + 0.0
        out.append(
            f'<text class="legend" x="8" y="{yl}" font-size="12" fill="{color}">'
            f"t=({t.real:.4g}, {t.imag:.4g}): {shape}</text>"
        )
        yl += 18
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
