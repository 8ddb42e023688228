"""Self-contained SVG rendering of sweep grids (heatmaps and line charts)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from ._viridis import VIRIDIS
from .grid import SweepGrid

MASK_COLOUR = "#d9d9d9"
LINE_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b")


def _scaled(values: np.ndarray, log_scale: bool):
    """Map finite values to [0, 1]; returns (scaled, vmin, vmax)."""
    v = np.array(values, dtype=float)
    ok = np.isfinite(v)
    if log_scale:
        pos = ok & (v > 0)
        floor = v[pos].min() if pos.any() else 1.0
        v = np.where(ok, np.log10(np.maximum(v, floor)), np.nan)
    if not ok.any():
        return np.full(v.shape, np.nan), 0.0, 1.0
    lo, hi = float(np.nanmin(v)), float(np.nanmax(v))
    span = hi - lo if hi > lo else 1.0
    return (v - lo) / span, lo, hi


def _colour(t: float) -> str:
    if not np.isfinite(t):
        return MASK_COLOUR
    return VIRIDIS[min(int(t * 255 + 0.5), 255)]


def _label(v) -> str:
    if isinstance(v, str):
        return escape(v)
    return f"{v:.3g}"


def _ticks(count: int, most: int = 6):
    if count <= most:
        return list(range(count))
    step = (count - 1) / (most - 1)
    return sorted({int(round(k * step)) for k in range(most)})


def render_heatmap(
    grid: SweepGrid,
    log_scale: bool = False,
    contour=None,
    title: str | None = None,
    cell: int = 10,
) -> str:
    """Heatmap of ``grid`` with rows top to bottom and a colour bar.

    ``contour`` is a list of ``[row_index, col_position, ...]`` points, as
    produced by :func:`resonant.resonance.contour_crossings`; it defaults to
    ``grid.meta["nu_contour"]`` when present and is drawn dashed.
    """
    nr, nc = grid.shape
    left, top, bar = 80, 40, 60
    width, height = left + nc * cell + bar + 70, top + nr * cell + 60
    scaled, lo, hi = _scaled(grid.values, log_scale)
    title = title if title is not None else grid.quantity

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="20" font-size="13">{escape(title)}</text>',
    ]
    for i in range(nr):
        for j in range(nc):
            out.append(
                f'<rect x="{left + j * cell}" y="{top + i * cell}" width="{cell}" '
                f'height="{cell}" fill="{_colour(scaled[i, j])}"/>'
            )

    for j in _ticks(nc):
        x = left + (j + 0.5) * cell
        out.append(
            f'<text x="{x:.1f}" y="{top + nr * cell + 14}" text-anchor="middle">'
            f"{_label(grid.col_values[j])}</text>"
        )
    for i in _ticks(nr):
        y = top + (i + 0.5) * cell + 4
        out.append(f'<text x="{left - 4}" y="{y:.1f}" text-anchor="end">{_label(grid.row_values[i])}</text>')
    out.append(
        f'<text x="{left + nc * cell / 2:.1f}" y="{top + nr * cell + 32}" '
        f'text-anchor="middle">{escape(grid.col_name)}</text>'
    )
    out.append(
        f'<text x="14" y="{top + nr * cell / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {top + nr * cell / 2:.1f})">{escape(grid.row_name)}</text>'
    )

    # colour bar
    bx, bh = left + nc * cell + 20, max(nr * cell, 64)
    for k in range(64):
        y = top + bh * (1 - (k + 1) / 64)
        out.append(
            f'<rect x="{bx}" y="{y:.2f}" width="14" height="{bh / 64 + 0.5:.2f}" '
            f'fill="{_colour(k / 63)}"/>'
        )
    fmt = (lambda v: f"1e{v:.2g}") if log_scale else (lambda v: f"{v:.3g}")
    out.append(f'<text x="{bx + 18}" y="{top + 8}">{fmt(hi)}</text>')
    out.append(f'<text x="{bx + 18}" y="{top + bh}">{fmt(lo)}</text>')

    points = contour if contour is not None else grid.meta.get("nu_contour")
    if points:
        xy = [(left + (p[1] + 0.5) * cell, top + (p[0] + 0.5) * cell) for p in points]
        rows = [p[0] for p in points]
        if len(set(rows)) == len(rows) and len(xy) > 1:
            path = " ".join(f"{x:.1f},{y:.1f}" for x, y in xy)
            out.append(
                f'<polyline points="{path}" fill="none" stroke="white" '
                f'stroke-width="1.5" stroke-dasharray="4 3"/>'
            )
        else:
            for x, y in xy:
                out.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="1.5" fill="white"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_lines(grid: SweepGrid, log_scale: bool = False, title: str | None = None) -> str:
    """One polyline per grid row against the (numeric) column values."""
    nr, nc = grid.shape
    left, top, w, h = 70, 40, 420, 260
    width, height = left + w + 140, top + h + 60
    xs = np.array(grid.col_values, dtype=float)
    ys = np.array(grid.values, dtype=float)
    if log_scale:
        pos = ys[np.isfinite(ys) & (ys > 0)]
        floor = pos.min() if pos.size else 1.0
        ys = np.where(np.isfinite(ys), np.log10(np.maximum(ys, floor)), np.nan)
    fin = np.isfinite(ys)
    y_lo, y_hi = (float(ys[fin].min()), float(ys[fin].max())) if fin.any() else (0.0, 1.0)
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    x_lo, x_hi = (float(xs.min()), float(xs.max())) if nc else (0.0, 1.0)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0

    def px(x):
        return left + (x - x_lo) / (x_hi - x_lo) * w

    def py(y):
        return top + h - (y - y_lo) / (y_hi - y_lo) * h

    title = title if title is not None else grid.quantity
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="20" font-size="13">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="black"/>',
    ]
    for k in range(5):
        yv = y_lo + (y_hi - y_lo) * k / 4
        lab = f"1e{yv:.2g}" if log_scale else f"{yv:.3g}"
        out.append(f'<text x="{left - 4}" y="{py(yv) + 4:.1f}" text-anchor="end">{lab}</text>')
        xv = x_lo + (x_hi - x_lo) * k / 4
        out.append(f'<text x="{px(xv):.1f}" y="{top + h + 14}" text-anchor="middle">{xv:.3g}</text>')
    out.append(
        f'<text x="{left + w / 2}" y="{top + h + 32}" text-anchor="middle">{escape(grid.col_name)}</text>'
    )
    for i in range(nr):
        colour = LINE_COLOURS[i % len(LINE_COLOURS)]
        pts = [f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xs, ys[i]) if math.isfinite(y)]
        if pts:
            out.append(
                f'<polyline points="{" ".join(pts)}" fill="none" stroke="{colour}" stroke-width="1.5"/>'
            )
        ly = top + 12 + 16 * i
        out.append(f'<line x1="{left + w + 12}" y1="{ly - 4}" x2="{left + w + 30}" y2="{ly - 4}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{left + w + 34}" y="{ly}">{escape(grid.row_name)}={_label(grid.row_values[i])}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
