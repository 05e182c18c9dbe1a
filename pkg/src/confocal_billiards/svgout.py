"""Deterministic SVG rendering: domain boundary, optional caustic and
trajectory overlays, and a bifurcation-diagram strip.

Output is SVG 1.1 with six-decimal coordinates and stable element
ordering, so renders are byte-identical for identical inputs.
"""

from __future__ import annotations

import math

import numpy as np

from .domain import BilliardDomain
from .geometry import planar_point

_KIND_COLOR = {
    "local_min": "#2166ac",
    "saddle_b": "#762a83",
    "local_max": "#b2182b",
    "singular_vertex_level": "#e08214",
}


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _path(points, close=False) -> str:
    cmds = [f"M {_fmt(points[0][0])} {_fmt(-points[0][1])}"]
    cmds += [f"L {_fmt(x)} {_fmt(-y)}" for x, y in points[1:]]
    if close:
        cmds.append("Z")
    return " ".join(cmds)


def _quadric_paths(domain: BilliardDomain, lam: float, bbox, n=256) -> list[str]:
    fam = domain.family
    a, b = fam.a, fam.b
    x0, y0, x1, y1 = bbox
    out = []
    if lam < b:
        A, B = math.sqrt(a - lam), math.sqrt(b - lam)
        ts = np.linspace(0, 2 * math.pi, n + 1)
        pts = np.column_stack((A * np.cos(ts), B * np.sin(ts)))
        out.append(_path(pts, close=True))
    elif lam == b:
        out.append(_path([(x0, 0.0), (x1, 0.0)]))
    elif lam < a:
        A, B = math.sqrt(a - lam), math.sqrt(lam - b)
        tmax = math.asinh(max(abs(y0), abs(y1)) / B + 1e-9)
        ts = np.linspace(-tmax, tmax, n + 1)
        for sx in (1, -1):
            pts = np.column_stack((sx * A * np.cosh(ts), B * np.sinh(ts)))
            out.append(_path(pts))
    else:
        out.append(_path([(0.0, y0), (0.0, y1)]))
    return out


def render_svg(domain: BilliardDomain, caustic: float | None = None,
               trajectory=None, diagram=None, width: float = 640.0) -> str:
    """Well-formed SVG 1.1 document with the domain boundary, an optional
    caustic overlay clipped to the viewport, an optional trajectory, and an
    optional bifurcation-diagram strip."""
    x0, y0, x1, y1 = domain.bbox()
    pad = 0.1 * max(x1 - x0, y1 - y0)
    x0, y0, x1, y1 = x0 - pad, y0 - pad, x1 + pad, y1 + pad
    strip_h = 0.12 * (y1 - y0) if diagram is not None else 0.0
    vw, vh = x1 - x0, (y1 - y0) + strip_h
    height = width * vh / vw
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="{_fmt(x0)} {_fmt(-y1)} {_fmt(vw)} {_fmt(vh)}">',
        f'<defs><clipPath id="viewport"><rect x="{_fmt(x0)}" y="{_fmt(-y1)}" '
        f'width="{_fmt(vw)}" height="{_fmt(y1 - y0)}"/></clipPath></defs>',
    ]
    stroke = max(vw, vh) / 400.0
    boundary = [tuple(p) for na in domain.norm
                for p in na.sample(domain.family, 64)[:-1]]
    lines.append(f'<path d="{_path(boundary, close=True)}" fill="#f5f2ea" '
                 f'stroke="#222222" stroke-width="{_fmt(stroke * 2)}"/>')
    if caustic is not None:
        for d in _quadric_paths(domain, caustic, (x0, y0, x1, y1)):
            lines.append(f'<path d="{d}" fill="none" stroke="#7b3294" '
                         f'stroke-width="{_fmt(stroke)}" stroke-dasharray='
                         f'"{_fmt(4 * stroke)} {_fmt(2 * stroke)}" '
                         f'clip-path="url(#viewport)"/>')
    if trajectory:
        pts = [trajectory[0].start] + [s.end for s in trajectory]
        lines.append(f'<path d="{_path(pts)}" fill="none" stroke="#1b7837" '
                     f'stroke-width="{_fmt(stroke)}" clip-path="url(#viewport)"/>')
    for c in domain.corners():
        color = "#d73027" if c.angle_class == "three_quarter" else "#222222"
        lines.append(f'<circle cx="{_fmt(c.point[0])}" cy="{_fmt(-c.point[1])}" '
                     f'r="{_fmt(2.5 * stroke)}" fill="{color}"/>')
    if diagram is not None:
        ymid = -y0 + 0.5 * strip_h
        vals = diagram.values()
        lo, hi = min(vals), max(vals)
        span = (hi - lo) or 1.0

        def sx(v):
            return x0 + 0.05 * vw + 0.9 * vw * (v - lo) / span
        lines.append(f'<line x1="{_fmt(sx(lo))}" y1="{_fmt(ymid)}" '
                     f'x2="{_fmt(sx(hi))}" y2="{_fmt(ymid)}" stroke="#888888" '
                     f'stroke-width="{_fmt(stroke)}"/>')
        for v, kind, _src in diagram.critical_values:
            color = _KIND_COLOR.get(kind, "#000000")
            lines.append(f'<line x1="{_fmt(sx(v))}" y1="{_fmt(ymid - 0.3 * strip_h)}" '
                         f'x2="{_fmt(sx(v))}" y2="{_fmt(ymid + 0.3 * strip_h)}" '
                         f'stroke="{color}" stroke-width="{_fmt(1.5 * stroke)}"/>')
        if caustic is not None:
            lines.append(f'<circle cx="{_fmt(sx(caustic))}" cy="{_fmt(ymid)}" '
                         f'r="{_fmt(2 * stroke)}" fill="#1b7837"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
