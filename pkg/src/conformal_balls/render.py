"""SVG pictures of 2-dimensional configurations in the chart from p+.

The boundary of D is the unit circle, drawn with radius 400 px about the
center of a 1000 px square canvas.  Each slot image is a circle with its
index at the center and a short tick at the image of the marked boundary
point (1, 0), which shows the frame.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .caps import base_cap, cap_plane_ball, transform_cap
from .conformal import Pole, apply_point, stereo_project, stereo_unproject
from .operad import Configuration

CANVAS = 1000
UNIT_PX = 400
TICK = 0.12


def _px(p) -> tuple[float, float]:
    # SVG y grows downwards
    return CANVAS / 2 + UNIT_PX * p[0], CANVAS / 2 - UNIT_PX * p[1]


def _num(x: float) -> str:
    s = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _circle(center, radius: float, cls: str) -> str:
    cx, cy = _px(center)
    return f'<circle class="{cls}" cx="{_num(cx)}" cy="{_num(cy)}" r="{_num(UNIT_PX * radius)}"/>'


def _tick(point, center) -> str:
    inner = point + TICK * (center - point)
    (x1, y1), (x2, y2) = _px(point), _px(inner)
    return f'<line class="frame" x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}"/>'


def svg_document(c: Configuration) -> str:
    if c.n != 2:
        raise ValueError(f"rendering needs n = 2, got n = {c.n}")
    marked = stereo_unproject(Pole.PLUS, np.array([1.0, 0.0]))
    origin = np.zeros(2)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" '
        f'viewBox="0 0 {CANVAS} {CANVAS}">',
        "<style>circle{fill:none;stroke-width:2}.boundary{stroke:#000}.slot{stroke:#1f5fbf}"
        ".frame{stroke:#c03020;stroke-width:3}text{font:20px sans-serif;text-anchor:middle;"
        "dominant-baseline:central;fill:#1f5fbf}</style>",
        _circle(origin, 1.0, "boundary"),
        _tick(np.array([1.0, 0.0]), origin),
    ]
    for i, f in enumerate(c.slots, start=1):
        center, radius = cap_plane_ball(transform_cap(f, base_cap(2)))
        point = stereo_project(Pole.PLUS, apply_point(f, marked))
        cx, cy = _px(center)
        lines.append(_circle(center, radius, "slot"))
        lines.append(_tick(point, center))
        lines.append(f'<text x="{_num(cx)}" y="{_num(cy)}">{i}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_svg(c: Configuration, path) -> None:
    Path(path).write_text(svg_document(c), encoding="utf-8")
