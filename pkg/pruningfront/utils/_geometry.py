from __future__ import annotations

from typing import List
from typing import Tuple

import numpy as np

from pruningfront.utils._types import BoundingBox


def box_polygon(box: BoundingBox) -> np.ndarray:
    """Counter clockwise rectangle `(4, 2)` from `(xmin, xmax, ymin, ymax)`."""
    xmin, xmax, ymin, ymax = box
    return np.array([[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]], dtype=float)


def clip_half_plane(polygon: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Clips a convex polygon to the closed half-plane `normal · P + offset >= 0`.

    One pass of Sutherland–Hodgman: every edge keeps its inside end points and contributes the crossing point when it
    straddles the boundary.

    Arguments:
        polygon: Vertices `(N, 2)` in order.
        normal: Normal vector `(2,)` pointing inside.
        offset: Constant term.

    Returns:
        The clipped polygon, possibly with zero vertices.
    """
    if len(polygon) == 0:
        return polygon

    values = polygon @ normal + offset
    output: List[np.ndarray] = []
    for k in range(len(polygon)):
        start, end = polygon[k - 1], polygon[k]
        v_start, v_end = values[k - 1], values[k]
        if v_end >= 0:
            if v_start < 0:
                output.append(start + (end - start) * (v_start / (v_start - v_end)))
            output.append(end)
        elif v_start >= 0:
            output.append(start + (end - start) * (v_start / (v_start - v_end)))

    return np.array(output, dtype=float).reshape(-1, 2)


def polygon_area(polygon: np.ndarray) -> float:
    """Unsigned shoelace area."""
    if len(polygon) < 3:  # noqa: PLR2004
        return 0.0
    x, y = polygon[:, 0], polygon[:, 1]
    return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) / 2)


def polygon_diameter(polygon: np.ndarray) -> float:
    """Largest distance between two vertices (0 for empty polygons)."""
    if len(polygon) == 0:
        return 0.0
    diff = polygon[:, None, :] - polygon[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=-1)).max())


def bounding_box(points: np.ndarray, margin: float = 0.0) -> BoundingBox:
    """Axis aligned box of `points` padded by `margin` times its size on every side."""
    lo, hi = points.min(axis=0), points.max(axis=0)
    pad = (hi - lo) * margin
    return (float(lo[0] - pad[0]), float(hi[0] + pad[0]), float(lo[1] - pad[1]), float(hi[1] + pad[1]))


def project_onto_segments(vertices: np.ndarray, point: np.ndarray) -> Tuple[float, float]:
    """Nearest point of a polyline to `point`.

    Returns:
        Fractional vertex index of the nearest point and its distance.
    """
    if len(vertices) == 1:
        return 0.0, float(np.linalg.norm(vertices[0] - point))

    start, end = vertices[:-1], vertices[1:]
    seg = end - start
    length2 = (seg**2).sum(axis=1)
    t = np.where(length2 > 0, ((point - start) * seg).sum(axis=1) / np.where(length2 > 0, length2, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    nearest = start + t[:, None] * seg
    dist = np.sqrt(((nearest - point) ** 2).sum(axis=1))
    k = int(np.argmin(dist))
    return k + float(t[k]), float(dist[k])
