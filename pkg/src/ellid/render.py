"""Dependency-free SVG rendering of frames and identification results."""

from __future__ import annotations

import numpy as np

from .geometry import StandardEllipse


def _bounds(points_list, pad=1.5):
    stacked = np.vstack([np.atleast_2d(p) for p in points_list if len(p)])
    lo = stacked.min(axis=0) - pad
    hi = stacked.max(axis=0) + pad
    return lo, hi


def _ellipse_tag(e: StandardEllipse, color="#1f77b4", width=0.05):
    deg = np.degrees(e.theta)
    return (f'<ellipse cx="0" cy="0" rx="{e.r2:.4f}" ry="{e.r1:.4f}" '
            f'transform="translate({e.xc[0]:.4f} {e.xc[1]:.4f}) rotate({deg:.3f})" '
            f'fill="none" stroke="{color}" stroke-width="{width}"/>')


def _polyline(points, color, width=0.06, dashed=False):
    if len(points) < 2:
        return ""
    coords = " ".join(f"{p[0]:.4f},{p[1]:.4f}" for p in points)
    dash = ' stroke-dasharray="0.25 0.15"' if dashed else ""
    return (f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{dash}/>')


def render_frame(points=None, ellipses=None, polygons=None, trajectory=None,
                 plan=None, vehicle=None, goal=None, size=640) -> str:
    """Compose one scene as an SVG document string."""
    points = np.atleast_2d(points) if points is not None and len(points) else np.zeros((0, 2))
    ellipses = ellipses or []
    polygons = polygons or []
    sources = [points] + [p for p in polygons]
    if trajectory is not None and len(trajectory):
        sources.append(np.atleast_2d(trajectory))
    for e in ellipses:
        sources.append(e.xc[None] + np.array([[e.r2, e.r2], [-e.r2, -e.r2]]))
    if goal is not None:
        sources.append(np.atleast_2d(goal))
    if not sources or all(len(s) == 0 for s in sources):
        sources = [np.array([[0.0, 0.0], [1.0, 1.0]])]
    lo, hi = _bounds(sources)
    span = hi - lo

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
        f'height="{int(size * span[1] / span[0])}" '
        f'viewBox="{lo[0]:.3f} {-hi[1]:.3f} {span[0]:.3f} {span[1]:.3f}">',
        # Flip y so +y points up in the rendered image.
        '<g transform="scale(1 -1)">',
        f'<rect x="{lo[0]:.3f}" y="{lo[1]:.3f}" width="{span[0]:.3f}" '
        f'height="{span[1]:.3f}" fill="#fafafa"/>',
    ]
    for poly in polygons:
        coords = " ".join(f"{p[0]:.4f},{p[1]:.4f}" for p in poly)
        parts.append(f'<polygon points="{coords}" fill="#d9d9d9" '
                     f'stroke="#888888" stroke-width="0.03"/>')
    for p in points:
        parts.append(f'<circle cx="{p[0]:.4f}" cy="{p[1]:.4f}" r="0.035" '
                     f'fill="#d62728"/>')
    for e in ellipses:
        parts.append(_ellipse_tag(e))
    if trajectory is not None and len(trajectory):
        parts.append(_polyline(np.atleast_2d(trajectory), "#2ca02c", width=0.08))
    if plan is not None and len(plan):
        parts.append(_polyline(np.atleast_2d(plan), "#9467bd", dashed=True))
    if vehicle is not None:
        parts.append(f'<circle cx="{vehicle[0]:.4f}" cy="{vehicle[1]:.4f}" '
                     f'r="0.3" fill="#2ca02c" fill-opacity="0.7"/>')
    if goal is not None:
        parts.append(f'<circle cx="{goal[0]:.4f}" cy="{goal[1]:.4f}" r="0.2" '
                     f'fill="none" stroke="#ff7f0e" stroke-width="0.08"/>')
    parts.append("</g></svg>")
    return "\n".join(parts)
