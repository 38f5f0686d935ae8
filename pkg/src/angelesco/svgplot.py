"""Deterministic SVG 1.1 emission for study reports and S-curve portraits.

No plotting library: plain path/circle elements with fixed-format
coordinates, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path


def _fmt(x: float) -> str:
    out = f"{x:.6f}"
    return "0.000000" if out == "-0.000000" else out


class _Canvas:
    def __init__(self, xlim, ylim, width=800, height=500, margin=50):
        self.xlim, self.ylim = xlim, ylim
        self.width, self.height, self.margin = width, height, margin

    def x(self, v):
        a, b = self.xlim
        t = (v - a) / (b - a) if b > a else 0.5
        return self.margin + t * (self.width - 2 * self.margin)

    def y(self, v):
        a, b = self.ylim
        t = (v - a) / (b - a) if b > a else 0.5
        return self.height - self.margin - t * (self.height - 2 * self.margin)

    def header(self):
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>\n'
        )


def _polyline(canvas, pts, color, width=1.2):
    coords = " ".join(
        f"{_fmt(canvas.x(px))},{_fmt(canvas.y(py))}" for px, py in pts
    )
    return (
        f'<polyline fill="none" stroke="{color}" '
        f'stroke-width="{width}" points="{coords}"/>\n'
    )


def _circle(canvas, px, py, r, color):
    return (
        f'<circle cx="{_fmt(canvas.x(px))}" cy="{_fmt(canvas.y(py))}" '
        f'r="{r}" fill="{color}"/>\n'
    )


def zero_scatter_svg(components, zero_sets, title="") -> str:
    """Zeros (crosses on the axis) over equilibrium density curves.

    ``components``: GridMeasure per component; ``zero_sets``: list of
    complex-zero lists, one per component.
    """
    xs = [x for c in components for x in c.nodes]
    dens = []
    for c in components:
        dens.extend(c.density_estimates())
    if not xs:
        raise ValueError("empty report, nothing to plot")
    xlim = (min(xs) - 0.5, max(xs) + 0.5)
    ylim = (-0.1 * max(dens), 1.15 * max(dens))
    cv = _Canvas(xlim, ylim)
    parts = [cv.header()]
    axis_y = _fmt(cv.y(0.0))
    parts.append(
        f'<line x1="{_fmt(cv.x(xlim[0]))}" y1="{axis_y}" '
        f'x2="{_fmt(cv.x(xlim[1]))}" y2="{axis_y}" stroke="#888" '
        f'stroke-width="0.8"/>\n'
    )
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    for idx, c in enumerate(components):
        color = palette[idx % len(palette)]
        pts = list(zip(c.nodes, c.density_estimates()))
        parts.append(_polyline(cv, pts, color))
    for idx, zeros in enumerate(zero_sets):
        color = palette[idx % len(palette)]
        for z in sorted(zeros, key=lambda t: (t.real, t.imag)):
            parts.append(_circle(cv, z.real, z.imag, 2.5, color))
    if title:
        parts.append(
            f'<text x="{cv.margin}" y="24" font-family="monospace" '
            f'font-size="14">{title}</text>\n'
        )
    parts.append("</svg>\n")
    return "".join(parts)


def trajectory_portrait_svg(result, title="") -> str:
    """Arcs, branch points, and V-zeros of a solved S-configuration."""
    pts = [a for a in result.e_points]
    pts += list(result.v_roots) + list(result.double_roots)
    for arc in result.arcs:
        pts.extend(arc.points)
    xr = [p.real for p in pts]
    yr = [p.imag for p in pts]
    pad = 0.3 + 0.1 * max(max(xr) - min(xr), max(yr) - min(yr))
    xlim = (min(xr) - pad, max(xr) + pad)
    ylim = (min(yr) - pad, max(yr) + pad)
    # keep the aspect ratio square in world units
    spanx, spany = xlim[1] - xlim[0], ylim[1] - ylim[0]
    if spanx > spany:
        mid = (ylim[0] + ylim[1]) / 2
        ylim = (mid - spanx / 2, mid + spanx / 2)
    else:
        mid = (xlim[0] + xlim[1]) / 2
        xlim = (mid - spany / 2, mid + spany / 2)
    cv = _Canvas(xlim, ylim, width=600, height=600)
    parts = [cv.header()]
    for arc in result.arcs:
        pts2 = [(z.real, z.imag) for z in arc.points]
        parts.append(_polyline(cv, pts2, "#1f77b4", 1.6))
    for a in result.e_points:
        parts.append(_circle(cv, a.real, a.imag, 4, "#d62728"))
    for v in result.v_roots:
        parts.append(_circle(cv, v.real, v.imag, 3, "#2ca02c"))
    for u in result.double_roots:
        parts.append(_circle(cv, u.real, u.imag, 3, "#9467bd"))
    if title:
        parts.append(
            f'<text x="{cv.margin}" y="24" font-family="monospace" '
            f'font-size="14">{title}</text>\n'
        )
    parts.append("</svg>\n")
    return "".join(parts)


def emit_plots(report, eq_components, zero_sets_per_n, out_dir,
               scurve_result=None) -> list:
    """Write the study's SVG set; returns the relative paths written.

    Empty inputs write nothing and succeed.
    """
    out = Path(out_dir)
    written = []
    if eq_components and zero_sets_per_n:
        out.mkdir(parents=True, exist_ok=True)
        for n, zsets in sorted(zero_sets_per_n.items()):
            svg = zero_scatter_svg(eq_components, zsets,
                                   title=f"zeros vs equilibrium density, n={n}")
            rel = f"plots/zeros_n{n:03d}.svg"
            path = out / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(svg)
            written.append(rel)
    if scurve_result is not None:
        out.mkdir(parents=True, exist_ok=True)
        svg = trajectory_portrait_svg(scurve_result, title="critical trajectories")
        rel = "plots/scurve.svg"
        (out / "plots").mkdir(parents=True, exist_ok=True)
        (out / rel).write_text(svg)
        written.append(rel)
    return written
