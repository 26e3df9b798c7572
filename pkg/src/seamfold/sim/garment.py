"""Canonical flat T-shirt geometry: outline, seam polylines, crossings.

The geometry ships as a versioned JSON data file.  Coordinates live in a
fixed table frame (x right, y down) matching the detector image frame.
Seam polylines carry a visibility tag: most seams are stitched through and
show from either side of the fabric; seams folded to the inside (inward
hems, the back collar) only show when a flipped layer exposes them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np
from shapely.geometry import Point, Polygon

from .. import data as _data_pkg
from .._core import fill_polygon
from ..codec import SeamCategory
from ..fusion import CrossingType
from ..metrics import CoverageMask
from .geometry import ring_array

GARMENT_SCHEMA_VERSION = 1


class SeamVisibility(Enum):
    BOTH_SIDES = "both"
    BACK_ONLY = "back_only"


@dataclass(frozen=True)
class SeamPolyline:
    category: SeamCategory
    visibility: SeamVisibility
    points: tuple[tuple[float, float], ...]

    def segments(self) -> list[tuple[tuple[float, float], tuple[float, float]]]:
        return [(self.points[i], self.points[i + 1]) for i in range(len(self.points) - 1)]


@dataclass(frozen=True)
class CanonicalCrossing:
    crossing_type: CrossingType
    x: float
    y: float


@dataclass(frozen=True)
class CanonicalGarment:
    width: int
    height: int
    outline: tuple[tuple[float, float], ...]
    seams: tuple[SeamPolyline, ...]
    crossings: tuple[CanonicalCrossing, ...]

    @property
    def outline_polygon(self) -> Polygon:
        return Polygon(self.outline)

    def goal_mask(self) -> CoverageMask:
        ring = np.asarray(self.outline, dtype=np.float64)
        bits = fill_polygon(ring[:, 0], ring[:, 1], self.width, self.height)
        return CoverageMask(bits.astype(bool))

    def cov_max(self) -> int:
        return self.goal_mask().popcount()

    def anchor(self) -> tuple[float, float]:
        """Release anchor: midpoint of the two shoulder crossings."""
        pts = [
            (c.x, c.y) for c in self.crossings if c.crossing_type is CrossingType.SHOULDER
        ]
        return (
            sum(p[0] for p in pts) / len(pts),
            sum(p[1] for p in pts) / len(pts),
        )


def _seam_contains(seam: SeamPolyline, x: float, y: float, tol: float = 1e-6) -> bool:
    for (ax, ay), (bx, by) in seam.segments():
        px, py = bx - ax, by - ay
        qx, qy = x - ax, y - ay
        cross = px * qy - py * qx
        dot = px * qx + py * qy
        n2 = px * px + py * py
        if abs(cross) <= tol * math.sqrt(n2) and -tol <= dot <= n2 + tol:
            return True
    return False


def validate_garment(garment: CanonicalGarment) -> None:
    """Check the structural invariants of a canonical garment."""
    poly = garment.outline_polygon
    if not poly.is_valid or poly.area <= 0:
        raise ValueError("outline polygon is invalid or empty")
    hull = poly.buffer(1e-6)
    for seam in garment.seams:
        if len(seam.points) < 2:
            raise ValueError("seam polyline needs at least two points")
        for (ax, ay), (bx, by) in seam.segments():
            for t in np.linspace(0.0, 1.0, 12):
                x, y = ax + t * (bx - ax), ay + t * (by - ay)
                if not hull.covers(Point(x, y)):
                    raise ValueError(
                        f"seam point ({x:.2f}, {y:.2f}) lies outside the outline"
                    )
    counts: dict[CrossingType, int] = {t: 0 for t in CrossingType}
    cx_axis = 0.0
    for c in garment.crossings:
        counts[c.crossing_type] += 1
        incident = [s for s in garment.seams if _seam_contains(s, c.x, c.y)]
        if len(incident) < 2:
            raise ValueError(
                f"crossing {c.crossing_type.name} at ({c.x}, {c.y}) does not sit on "
                f"a seam intersection (found {len(incident)} incident seams)"
            )
        cx_axis += c.x
    for t, n in counts.items():
        if n != 2:
            raise ValueError(f"expected exactly 2 {t.name} crossings, found {n}")
    cx_axis /= len(garment.crossings)
    for c in garment.crossings:
        mirrored = (2 * cx_axis - c.x, c.y)
        twin = any(
            o.crossing_type == c.crossing_type
            and math.isclose(o.x, mirrored[0], abs_tol=1e-6)
            and math.isclose(o.y, mirrored[1], abs_tol=1e-6)
            for o in garment.crossings
        )
        if not twin:
            raise ValueError(
                f"crossing {c.crossing_type.name} at ({c.x}, {c.y}) lacks a mirror twin"
            )


_CATEGORY_NAMES = {c.name.lower(): c for c in SeamCategory}
_CROSSING_NAMES = {t.name.lower(): t for t in CrossingType}


def garment_from_dict(obj: dict) -> CanonicalGarment:
    try:
        frame = obj["frame"]
        garment = CanonicalGarment(
            width=frame["width"],
            height=frame["height"],
            outline=tuple((p[0], p[1]) for p in obj["outline"]),
            seams=tuple(
                SeamPolyline(
                    category=_CATEGORY_NAMES[s["category"]],
                    visibility=SeamVisibility(s["visibility"]),
                    points=tuple((p[0], p[1]) for p in s["points"]),
                )
                for s in obj["seams"]
            ),
            crossings=tuple(
                CanonicalCrossing(
                    crossing_type=_CROSSING_NAMES[c["type"]],
                    x=c["point"][0],
                    y=c["point"][1],
                )
                for c in obj["crossings"]
            ),
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise ValueError(f"bad garment geometry file: {exc}") from exc
    validate_garment(garment)
    return garment


def garment_to_dict(garment: CanonicalGarment) -> dict:
    return {
        "schema_version": GARMENT_SCHEMA_VERSION,
        "frame": {"width": garment.width, "height": garment.height},
        "outline": [list(p) for p in garment.outline],
        "seams": [
            {
                "category": s.category.name.lower(),
                "visibility": s.visibility.value,
                "points": [list(p) for p in s.points],
            }
            for s in garment.seams
        ],
        "crossings": [
            {"type": c.crossing_type.name.lower(), "point": [c.x, c.y]}
            for c in garment.crossings
        ],
    }


def load_garment(path: str | Path | None = None) -> CanonicalGarment:
    """Load a garment geometry file; defaults to the packaged T-shirt."""
    if path is None:
        text = resources.files(_data_pkg).joinpath("tshirt_canonical.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return garment_from_dict(json.loads(text))
