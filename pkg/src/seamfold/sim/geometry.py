"""Planar transform and polygon helpers for the fold-stack model.

Transforms are 3x3 homogeneous matrices (rotations, translations,
reflections across arbitrary lines).  Polygon splitting and area math go
through shapely; rasterization and visibility queries go through the
kernel core.
"""

from __future__ import annotations

import math

import numpy as np
from shapely.geometry import GeometryCollection, LineString, MultiPolygon, Polygon
from shapely.ops import split as shapely_split


def identity_matrix() -> np.ndarray:
    return np.eye(3)


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def translation_matrix(tx: float, ty: float) -> np.ndarray:
    return np.array([[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]])


def reflection_matrix(px: float, py: float, dx: float, dy: float) -> np.ndarray:
    """Reflection across the line through (px, py) with direction (dx, dy)."""
    n2 = dx * dx + dy * dy
    if n2 == 0:
        raise ValueError("fold line direction must be nonzero")
    a = (dx * dx - dy * dy) / n2
    b = 2.0 * dx * dy / n2
    lin = np.array([[a, b, 0.0], [b, -a, 0.0], [0.0, 0.0, 1.0]])
    return translation_matrix(px, py) @ lin @ translation_matrix(-px, -py)


def apply_transform(mat: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Apply a 3x3 homogeneous transform to an (n, 2) point array."""
    pts = np.asarray(pts, dtype=np.float64)
    return pts @ mat[:2, :2].T + mat[:2, 2]


def apply_to_point(mat: np.ndarray, x: float, y: float) -> tuple[float, float]:
    return (
        mat[0, 0] * x + mat[0, 1] * y + mat[0, 2],
        mat[1, 0] * x + mat[1, 1] * y + mat[1, 2],
    )


def apply_to_vector(mat: np.ndarray, dx: float, dy: float) -> tuple[float, float]:
    return (mat[0, 0] * dx + mat[0, 1] * dy, mat[1, 0] * dx + mat[1, 1] * dy)


def line_side(px: float, py: float, dx: float, dy: float, qx: float, qy: float) -> float:
    """Signed side of point q w.r.t. the oriented line (p, d); >0 is left."""
    return dx * (qy - py) - dy * (qx - px)


_SPLIT_EXTENT = 1.0e5


def split_polygon_by_line(
    poly: Polygon, px: float, py: float, dx: float, dy: float
) -> list[Polygon]:
    """Cut a polygon by an infinite line; returns the pieces (>= 1)."""
    norm = math.hypot(dx, dy)
    ux, uy = dx / norm, dy / norm
    cutter = LineString(
        [
            (px - ux * _SPLIT_EXTENT, py - uy * _SPLIT_EXTENT),
            (px + ux * _SPLIT_EXTENT, py + uy * _SPLIT_EXTENT),
        ]
    )
    try:
        parts = shapely_split(poly, cutter)
    except ValueError:
        parts = GeometryCollection([poly])
    return polygon_pieces(parts)


_MIN_PIECE_AREA = 1.0e-6


def polygon_pieces(geom) -> list[Polygon]:
    """Flatten any geometry into its non-degenerate polygon parts, sorted.

    Split/reflect arithmetic can leave slightly invalid rings (sliver
    self-touches); those are healed before use so downstream set
    operations cannot fail on them.
    """
    if isinstance(geom, Polygon):
        parts = [geom]
    elif isinstance(geom, (MultiPolygon, GeometryCollection)):
        parts = [g for g in geom.geoms if isinstance(g, Polygon)]
    else:
        parts = []
    healed: list[Polygon] = []
    for p in parts:
        if p.area <= _MIN_PIECE_AREA:
            continue
        if p.is_valid:
            healed.append(p)
            continue
        fixed = p.buffer(0)
        if isinstance(fixed, Polygon):
            if fixed.area > _MIN_PIECE_AREA:
                healed.append(fixed)
        else:
            healed.extend(
                g for g in getattr(fixed, "geoms", []) if isinstance(g, Polygon) and g.area > _MIN_PIECE_AREA
            )
    healed.sort(key=lambda p: p.bounds)
    return healed


def transformed_polygon(mat: np.ndarray, poly: Polygon):
    """Apply a homogeneous transform to a polygon's exterior, healed.

    Healing may split a sliver into parts, so the result can be a
    MultiPolygon; callers feed it to union/area operations that accept both.
    """
    out = Polygon(apply_transform(mat, np.asarray(poly.exterior.coords)))
    if not out.is_valid:
        out = out.buffer(0)
    return out


def ring_array(poly: Polygon) -> np.ndarray:
    """Exterior ring as an (n, 2) float64 array without the closing vertex."""
    coords = np.asarray(poly.exterior.coords, dtype=np.float64)
    return coords[:-1]
