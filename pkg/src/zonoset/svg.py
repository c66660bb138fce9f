"""Tiny SVG emitter for 2D zonotope projections."""

from __future__ import annotations

from .core import PerturbedAffineSet, project_2d, vertices


def _fmt(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def render_svg(
    X: PerturbedAffineSet,
    k1: int | str,
    k2: int | str,
    width: int = 480,
    height: int = 360,
) -> str:
    """SVG document with the projected polygon, axes and center mark."""
    Z = project_2d(X, k1, k2)
    verts = vertices(Z)
    xs = [float(v[0]) for v in verts]
    ys = [float(v[1]) for v in verts]
    cx, cy = float(Z.center[0]), float(Z.center[1])
    lo_x, hi_x = min(xs + [0.0]), max(xs + [0.0])
    lo_y, hi_y = min(ys + [0.0]), max(ys + [0.0])
    span_x = (hi_x - lo_x) or 1.0
    span_y = (hi_y - lo_y) or 1.0
    pad = 0.1

    def sx(x: float) -> float:
        return (x - lo_x + pad * span_x) / (span_x * (1 + 2 * pad)) * width

    def sy(y: float) -> float:
        return height - (y - lo_y + pad * span_y) / (span_y * (1 + 2 * pad)) * height

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<line x1="{_fmt(sx(lo_x))}" y1="{_fmt(sy(0))}" x2="{_fmt(sx(hi_x))}" '
        f'y2="{_fmt(sy(0))}" stroke="#999" stroke-width="1"/>',
        f'<line x1="{_fmt(sx(0))}" y1="{_fmt(sy(lo_y))}" x2="{_fmt(sx(0))}" '
        f'y2="{_fmt(sy(hi_y))}" stroke="#999" stroke-width="1"/>',
    ]
    if len(verts) == 1:
        parts.append(
            f'<rect x="{_fmt(sx(cx) - 0.5)}" y="{_fmt(sy(cy) - 0.5)}" width="1" '
            f'height="1" fill="#c33"/>'
        )
    else:
        points = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        shape = "polygon" if len(verts) > 2 else "polyline"
        parts.append(
            f'<{shape} points="{points}" fill="#fde68a" fill-opacity="0.7" '
            f'stroke="#b45309" stroke-width="1.5"/>'
        )
        parts.append(
            f'<circle cx="{_fmt(sx(cx))}" cy="{_fmt(sy(cy))}" r="3" fill="#1d4ed8"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_svg(X: PerturbedAffineSet, k1: int | str, k2: int | str, path: str) -> None:
    """Write the projection plot to a file."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_svg(X, k1, k2))
