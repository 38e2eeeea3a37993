"""Orthographic SVG projections of sampled curves."""

from __future__ import annotations

import numpy as np

from .io import fmt

PROJECTIONS = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}
MARGIN = 0.05


def project(points, axes: str = "xy") -> np.ndarray:
    if axes not in PROJECTIONS:
        raise ValueError(f"unknown projection {axes!r}; choose from {', '.join(PROJECTIONS)}")
    pts = np.asarray(points, dtype=float)
    i, j = PROJECTIONS[axes]
    if max(i, j) >= pts.shape[1]:
        raise ValueError(f"projection {axes} needs at least {max(i, j) + 1} coordinates")
    return pts[:, [i, j]]


def polylines_svg(curves, axes: str = "xy", width: int = 600) -> str:
    """One ``<polyline>`` per curve; viewBox fits all curves with a 5% margin.

    The y coordinate is negated so the picture has the usual orientation.
    """
    if not curves:
        raise ValueError("no samples")
    proj = []
    for pts in curves:
        p = project(pts, axes)
        if p.shape[0] == 0:
            raise ValueError("no samples")
        proj.append(np.column_stack([p[:, 0], -p[:, 1]]))
    allp = np.vstack(proj)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = hi - lo
    size = max(float(span.max()), 1e-12)
    span = np.where(span > 0, span, size)
    pad = MARGIN * span
    x0, y0 = lo - pad
    w, h = span + 2 * pad
    height = max(1, int(round(width * h / w)))
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="{fmt(x0)} {fmt(y0)} {fmt(w)} {fmt(h)}">',
    ]
    for p in proj:
        coords = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in p)
        out.append(
            f'  <polyline fill="none" stroke="black" stroke-width="1" '
            f'vector-effect="non-scaling-stroke" points="{coords}"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, curves, axes: str = "xy"):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(polylines_svg(curves, axes))
