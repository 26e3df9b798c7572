"""Numpy reference implementation of the geometry kernels.

Semantics are shared with the compiled backend and must stay bit-identical:

* ``fill_polygon`` — even-odd scanline fill; a pixel (row r, col c) is set
  iff its center (c + 0.5, r + 0.5) lies inside the ring.
* ``points_in_polygon`` — ray cast with the half-open edge rule
  (y1 <= yc < y2 counts, reversed likewise).
* ``uncovered_intervals`` — parameter intervals of a segment not covered
  by the union of a set of rings.

The compiled backend exists because these dominate simulator runtime;
this module is the import-time fallback and the ground truth for tests.
"""

from __future__ import annotations

import math

import numpy as np


def fill_polygon(
    xs: np.ndarray,
    ys: np.ndarray,
    width: int,
    height: int,
    out: np.ndarray | None = None,
) -> np.ndarray:
    """OR a rasterized simple polygon into a uint8 mask of shape (H, W)."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if out is None:
        out = np.zeros((height, width), dtype=np.uint8)
    if xs.size < 3:
        return out
    x1, y1 = xs, ys
    x2, y2 = np.roll(xs, -1), np.roll(ys, -1)
    r_min = max(0, int(math.floor(float(ys.min()) - 0.5)))
    r_max = min(height - 1, int(math.ceil(float(ys.max()))))
    for r in range(r_min, r_max + 1):
        yc = r + 0.5
        straddles = ((y1 <= yc) & (yc < y2)) | ((y2 <= yc) & (yc < y1))
        if not straddles.any():
            continue
        xi = x1[straddles] + (yc - y1[straddles]) * (x2[straddles] - x1[straddles]) / (
            y2[straddles] - y1[straddles]
        )
        xi.sort()
        for k in range(0, xi.size - 1, 2):
            c0 = max(0, int(math.ceil(xi[k] - 0.5)))
            c1 = min(width, int(math.ceil(xi[k + 1] - 0.5)))
            if c1 > c0:
                out[r, c0:c1] = 1
    return out


def points_in_polygon(
    px: np.ndarray, py: np.ndarray, xs: np.ndarray, ys: np.ndarray
) -> np.ndarray:
    """Inside flags (uint8) for each query point against one ring."""
    px = np.ascontiguousarray(px, dtype=np.float64)
    py = np.ascontiguousarray(py, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if xs.size < 3:
        return np.zeros(px.shape, dtype=np.uint8)
    x1, y1 = xs, ys
    x2, y2 = np.roll(xs, -1), np.roll(ys, -1)
    yc = py[:, None]
    xc = px[:, None]
    straddles = ((y1 <= yc) & (yc < y2)) | ((y2 <= yc) & (yc < y1))
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = x1 + (yc - y1) * (x2 - x1) / (y2 - y1)
    crossings = np.count_nonzero(straddles & (xc < xi), axis=1)
    return (crossings % 2).astype(np.uint8)


def _point_in_ring(ax: float, ay: float, xs: np.ndarray, ys: np.ndarray) -> bool:
    return bool(
        points_in_polygon(np.array([ax]), np.array([ay]), xs, ys)[0]
    )


def uncovered_intervals(
    ax: float,
    ay: float,
    bx: float,
    by: float,
    verts: np.ndarray,
    offsets: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Intervals of the segment A->B not covered by the union of rings.

    ``verts`` is an (n, 2) float64 array of concatenated ring vertices and
    ``offsets`` the int64 ring start indices (length n_rings + 1).
    Returns parallel arrays (t0s, t1s) with 0 <= t0 < t1 <= 1.
    """
    verts = np.ascontiguousarray(verts, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    n_rings = offsets.size - 1
    dx = bx - ax
    dy = by - ay
    denom = dx * dx + dy * dy
    events: list[tuple[float, int]] = []
    inside = np.zeros(n_rings, dtype=bool)
    for r in range(n_rings):
        ring = verts[offsets[r] : offsets[r + 1]]
        xs, ys = ring[:, 0], ring[:, 1]
        if xs.size < 3:
            continue
        inside[r] = _point_in_ring(ax, ay, xs, ys)
        sp = dx * (ys - ay) - dy * (xs - ax)
        sq = np.roll(sp, -1)
        straddles = ((sp <= 0) & (0 < sq)) | ((sq <= 0) & (0 < sp))
        if not straddles.any():
            continue
        p1 = ring[straddles]
        p2 = np.roll(ring, -1, axis=0)[straddles]
        s = sp[straddles] / (sp[straddles] - sq[straddles])
        ix = p1[:, 0] + s * (p2[:, 0] - p1[:, 0])
        iy = p1[:, 1] + s * (p2[:, 1] - p1[:, 1])
        t = ((ix - ax) * dx + (iy - ay) * dy) / denom
        for v in t[(0.0 <= t) & (t < 1.0)]:
            events.append((float(v), r))
    events.sort()
    depth = int(inside.sum())
    t0s: list[float] = []
    t1s: list[float] = []
    open_t = 0.0 if depth == 0 else None
    for t, r in events:
        if inside[r]:
            depth -= 1
        else:
            depth += 1
        inside[r] = not inside[r]
        if depth == 0 and open_t is None:
            open_t = t
        elif depth > 0 and open_t is not None:
            if t > open_t:
                t0s.append(open_t)
                t1s.append(t)
            open_t = None
    if open_t is not None and open_t < 1.0:
        t0s.append(open_t)
        t1s.append(1.0)
    return np.asarray(t0s, dtype=np.float64), np.asarray(t1s, dtype=np.float64)
