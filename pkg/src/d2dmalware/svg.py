"""Minimal SVG rendering of street systems and epidemic snapshots.

Layers are separate root groups: ``streets`` (red), ``devices`` (S blue,
I black, G green) and ``overlay`` (stop circle and annotations).
"""

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

STATE_COLORS = ("blue", "black", "green")
_SIZE = 800


def _transform(half_width):
    scale = _SIZE / (2.0 * half_width)

    def xy(x, y):
        return (x + half_width) * scale, (half_width - y) * scale

    return xy, scale


def render(streets, positions=None, states=None, circle_radius=None, annotation=None):
    h = streets.window.half_width
    xy, scale = _transform(h)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
        f'viewBox="0 0 {_SIZE} {_SIZE}">',
        '<g id="streets" stroke="red" stroke-width="0.8" fill="none">',
    ]
    for (ax, ay), (bx, by) in zip(streets.a.tolist(), streets.b.tolist()):
        x1, y1 = xy(ax, ay)
        x2, y2 = xy(bx, by)
        out.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}"/>')
    out.append("</g>")
    out.append('<g id="devices" stroke="none">')
    if positions is not None:
        states = np.zeros(len(positions), dtype=int) if states is None else states
        for (x, y), s in zip(np.asarray(positions).tolist(), np.asarray(states).tolist()):
            cx, cy = xy(x, y)
            out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="1.6" fill="{STATE_COLORS[s]}"/>')
    out.append("</g>")
    out.append('<g id="overlay" fill="none" stroke="black">')
    if circle_radius is not None:
        cx, cy = xy(0.0, 0.0)
        out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{circle_radius * scale:.2f}" '
                   f'stroke-width="1.5"/>')
    if annotation:
        out.append(f'<text x="10" y="24" font-size="18" fill="black" stroke="none">{escape(annotation)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, *args, **kwargs):
    path = Path(path)
    path.write_text(render(*args, **kwargs))
    return path
