"""Deterministic 2D fold-stack T-shirt simulator.

A garment configuration is an ordered stack of fold lines applied to the
canonical flat garment, followed by a rigid placement onto the table
frame.  Folding reflects the material on one side of the line onto the
other; the moved pile lands on top in reversed order with its face
flipped, as a real fold does.  Rendering projects every layer to the
table, rasterizes the union into a coverage mask, and reports the seam
segments and seam crossings not hidden by higher layers.

Every operation is a pure function of its inputs plus an explicit seed,
so whole episodes replay bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from shapely.geometry import Point, Polygon
from shapely.ops import unary_union

from .._core import fill_polygon, points_in_polygon, uncovered_intervals
from ..codec import CodecConfig, OrientedSeamBox, SeamCategory, SeamLineSegment, encode
from ..fusion import CrossingDetection, CrossingType, DetectorSource, FusionConfig
from ..metrics import CoverageMask
from .garment import CanonicalGarment, SeamVisibility
from .geometry import (
    apply_to_point,
    apply_transform,
    identity_matrix,
    line_side,
    reflection_matrix,
    ring_array,
    rotation_matrix,
    split_polygon_by_line,
    transformed_polygon,
)

# rng stream salts: every random draw comes from an explicitly derived stream
_SALT_RANDOMIZE = 101
_SALT_FLING = 102
_SALT_DETECT = 103
_SALT_CONFIDENCE = 104


class SimulationError(RuntimeError):
    """The simulator could not satisfy a protocol requirement."""


class GraspMissError(RuntimeError):
    """A commanded grasp point missed the garment."""

    def __init__(self, point: tuple[float, float]):
        super().__init__(f"grasp point ({point[0]:.1f}, {point[1]:.1f}) missed the garment")
        self.point = point


@dataclass(frozen=True, slots=True)
class FoldLine:
    """Oriented fold line in the garment frame.

    The half-plane to the LEFT of the direction vector (positive cross
    product side) folds over onto the other half.
    """

    px: float
    py: float
    dx: float
    dy: float


@dataclass(frozen=True, slots=True)
class Placement:
    """Rigid placement onto the table: rotate about the origin, translate."""

    theta: float = 0.0
    tx: float = 0.0
    ty: float = 0.0

    def matrix(self) -> np.ndarray:
        m = rotation_matrix(self.theta)
        m[0, 2] = self.tx
        m[1, 2] = self.ty
        return m


@dataclass(frozen=True, slots=True)
class GarmentState:
    folds: tuple[FoldLine, ...] = ()
    placement: Placement = Placement()
    rng_seed: int = 0


def flat_state(rng_seed: int = 0) -> GarmentState:
    return GarmentState(folds=(), placement=Placement(), rng_seed=rng_seed)


def state_to_dict(state: GarmentState) -> dict:
    return {
        "folds": [[f.px, f.py, f.dx, f.dy] for f in state.folds],
        "placement": [state.placement.theta, state.placement.tx, state.placement.ty],
        "rng_seed": state.rng_seed,
    }


def state_from_dict(obj: dict) -> GarmentState:
    return GarmentState(
        folds=tuple(FoldLine(*f) for f in obj["folds"]),
        placement=Placement(*obj["placement"]),
        rng_seed=obj["rng_seed"],
    )


def state_digest(state: GarmentState) -> str:
    payload = json.dumps(state_to_dict(state), sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True, slots=True)
class VisibleSeamSegment:
    """A straight piece of seam visible from above, in table coordinates.

    ``piece_index`` and the parameter interval [t0, t1] identify the
    canonical seam material this piece came from; they are ground-truth
    provenance for analysis and tests, never detector input.
    """

    category: SeamCategory
    x1: float
    y1: float
    x2: float
    y2: float
    piece_index: int
    t0: float
    t1: float

    def length(self) -> float:
        return math.hypot(self.x2 - self.x1, self.y2 - self.y1)


@dataclass(frozen=True, slots=True)
class VisibleCrossing:
    """A seam crossing visible from above, with synthesized confidence.

    ``face_up`` tells whether the carrying material shows its front side;
    stitching shows through fabric, but detectors find the back side of a
    crossing much less reliably.
    """

    crossing_type: CrossingType
    x: float
    y: float
    confidence: float
    face_up: bool


@dataclass(frozen=True)
class GarmentObservation:
    visible_segments: tuple[VisibleSeamSegment, ...]
    visible_crossings: tuple[VisibleCrossing, ...]
    mask: CoverageMask
    ncov: float


@dataclass(frozen=True)
class SimulatorConfig:
    max_folds: int = 4
    randomize_ncov_threshold: float = 0.4
    randomize_max_attempts: int = 500
    min_fold_fraction: float = 0.05
    rotation_noise_deg: float = 5.0
    translation_noise_px: float = 10.0
    crossing_jitter_px: float = 3.0
    detector_recall: tuple[float, float] = (0.9, 0.9)
    backside_recall_factor: float = 0.25
    #: chance that stretching the pair taut also pulls out a fold whose
    #: flap lies across the corridor between the grippers
    stretch_resolve_prob: float = 0.35
    #: chance that a fold surviving the fling resettles as a fresh random
    #: fold when the garment lands (flinging agitates loose flaps)
    resettle_prob: float = 0.4
    confidence_noise: float = 0.02
    min_segment_px: float = 6.0
    frame_margin_px: float = 2.0
    codec: CodecConfig = field(default_factory=CodecConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)

    def noise_free(self) -> "SimulatorConfig":
        """Copy with every stochastic channel silenced (for fixed-point tests)."""
        return replace(
            self,
            rotation_noise_deg=0.0,
            translation_noise_px=0.0,
            crossing_jitter_px=0.0,
            detector_recall=(1.0, 1.0),
            backside_recall_factor=1.0,
            stretch_resolve_prob=0.0,
            resettle_prob=0.0,
            confidence_noise=0.0,
        )


@dataclass
class _Layer:
    region: Polygon  # canonical material region
    transform: np.ndarray  # canonical -> garment frame (folds only)
    rank: int
    front_up: bool


@dataclass
class _TableLayer:
    region: Polygon
    table_transform: np.ndarray  # canonical -> table frame
    inverse: np.ndarray
    ring_canonical: np.ndarray
    ring_table: np.ndarray
    rank: int
    front_up: bool


def _rng(*parts: int) -> np.random.Generator:
    return np.random.default_rng(list(parts))


def _complement(t0s: np.ndarray, t1s: np.ndarray) -> list[tuple[float, float]]:
    """Complement of sorted disjoint sub-intervals of [0, 1]."""
    out = []
    prev = 0.0
    for a, b in zip(t0s, t1s):
        if a > prev:
            out.append((prev, float(a)))
        prev = float(b)
    if prev < 1.0:
        out.append((prev, 1.0))
    return out


def build_layers(outline: Polygon, folds: Sequence[FoldLine]) -> list[_Layer]:
    """Apply the fold stack to the flat garment, tracking material layers."""
    layers = [_Layer(outline, identity_matrix(), 0, True)]
    for fold in folds:
        refl = reflection_matrix(fold.px, fold.py, fold.dx, fold.dy)
        stays: list[_Layer] = []
        moves: list[_Layer] = []
        for layer in layers:
            inv = np.linalg.inv(layer.transform)
            lpx, lpy = apply_to_point(inv, fold.px, fold.py)
            ldx = inv[0, 0] * fold.dx + inv[0, 1] * fold.dy
            ldy = inv[1, 0] * fold.dx + inv[1, 1] * fold.dy
            for piece in split_polygon_by_line(layer.region, lpx, lpy, ldx, ldy):
                rp = piece.representative_point()
                gx, gy = apply_to_point(layer.transform, rp.x, rp.y)
                if line_side(fold.px, fold.py, fold.dx, fold.dy, gx, gy) > 0:
                    moves.append(
                        _Layer(piece, refl @ layer.transform, 0, not layer.front_up)
                    )
                else:
                    stays.append(_Layer(piece, layer.transform, 0, layer.front_up))
        # the moved pile flips: bottom moved piece lands on top
        layers = stays + moves[::-1]
        for rank, layer in enumerate(layers):
            layer.rank = rank
    return layers


def fold_trajectory(
    folds: Sequence[FoldLine], x: float, y: float
) -> tuple[tuple[float, float], set[int]]:
    """Garment-frame position of a canonical point and the folds that moved it."""
    moved: set[int] = set()
    for i, f in enumerate(folds):
        if line_side(f.px, f.py, f.dx, f.dy, x, y) > 0:
            x, y = apply_to_point(reflection_matrix(f.px, f.py, f.dx, f.dy), x, y)
            moved.add(i)
    return (x, y), moved


@dataclass(frozen=True)
class SurrogateOutput:
    boxes: tuple[OrientedSeamBox, ...]
    scd1: tuple[CrossingDetection, ...]
    scd2: tuple[CrossingDetection, ...]


class Simulator:
    """Fold-stack simulator bound to one garment geometry and config."""

    def __init__(self, garment: CanonicalGarment, config: SimulatorConfig | None = None):
        self.garment = garment
        self.config = config or SimulatorConfig()
        self._outline_poly = garment.outline_polygon
        self._cov_max = garment.cov_max()
        self._goal_mask = garment.goal_mask()
        self._anchor = garment.anchor()
        # canonical seam polylines decomposed into straight pieces
        self._seam_pieces: list[tuple[SeamCategory, SeamVisibility, float, float, float, float]] = [
            (seam.category, seam.visibility, a[0], a[1], b[0], b[1])
            for seam in garment.seams
            for a, b in seam.segments()
        ]
        self._layer_cache: dict[GarmentState, list[_TableLayer]] = {}

    @property
    def cov_max(self) -> int:
        return self._cov_max

    @property
    def seam_pieces(self) -> list[tuple[SeamCategory, SeamVisibility, float, float, float, float]]:
        """Canonical straight seam pieces, indexed by the provenance ids."""
        return list(self._seam_pieces)

    @property
    def goal_mask(self) -> CoverageMask:
        return self._goal_mask

    # -- layer construction -------------------------------------------------

    def _layers(self, state: GarmentState) -> list[_TableLayer]:
        cached = self._layer_cache.get(state)
        if cached is not None:
            return cached
        placement = state.placement.matrix()
        table_layers = []
        for layer in build_layers(self._outline_poly, state.folds):
            table_transform = placement @ layer.transform
            ring_c = ring_array(layer.region)
            table_layers.append(
                _TableLayer(
                    region=layer.region,
                    table_transform=table_transform,
                    inverse=np.linalg.inv(table_transform),
                    ring_canonical=ring_c,
                    ring_table=apply_transform(table_transform, ring_c),
                    rank=layer.rank,
                    front_up=layer.front_up,
                )
            )
        if len(self._layer_cache) > 64:
            self._layer_cache.clear()
        self._layer_cache[state] = table_layers
        return table_layers

    # -- rendering -----------------------------------------------------------

    def _coverage(self, layers: Sequence[_TableLayer]) -> tuple[CoverageMask, float]:
        g = self.garment
        bits = np.zeros((g.height, g.width), dtype=np.uint8)
        for layer in layers:
            fill_polygon(layer.ring_table[:, 0], layer.ring_table[:, 1], g.width, g.height, bits)
        mask = CoverageMask(bits.astype(bool))
        return mask, min(mask.popcount() / self._cov_max, 1.0)

    def _suffix_occluders(
        self, layers: Sequence[_TableLayer]
    ) -> list[tuple[np.ndarray, np.ndarray]]:
        """occluders[r] = concatenated table rings of all layers above rank r."""
        n = len(layers)
        out: list[tuple[np.ndarray, np.ndarray]] = [None] * n  # type: ignore[list-item]
        verts = np.zeros((0, 2), dtype=np.float64)
        offsets = [0]
        for r in range(n - 1, -1, -1):
            out[r] = (verts, np.asarray(offsets, dtype=np.int64))
            ring = layers[r].ring_table
            verts = np.vstack([verts, ring]) if verts.size else ring.copy()
            offsets = offsets + [offsets[-1] + len(ring)]
        return out

    def render(self, state: GarmentState, coverage_only: bool = False) -> GarmentObservation:
        layers = self._layers(state)
        mask, cov = self._coverage(layers)
        if coverage_only:
            return GarmentObservation((), (), mask, cov)
        occluders = self._suffix_occluders(layers)
        segments: list[VisibleSeamSegment] = []
        for layer in layers:
            occ_verts, occ_offsets = occluders[layer.rank]
            region_offsets = np.asarray([0, len(layer.ring_canonical)], dtype=np.int64)
            for piece_index, (category, visibility, ax, ay, bx, by) in enumerate(
                self._seam_pieces
            ):
                if visibility is SeamVisibility.BACK_ONLY and layer.front_up:
                    continue
                out_t0, out_t1 = uncovered_intervals(
                    ax, ay, bx, by, layer.ring_canonical, region_offsets
                )
                for t0, t1 in _complement(out_t0, out_t1):
                    # clip endpoints land exactly on fold lines, which are
                    # also occluder-ring edges; probe occlusion a hair
                    # inside so the ray-cast parity is never edge-exact
                    eps = 1e-7 * (t1 - t0)
                    q0, q1 = t0 + eps, t1 - eps
                    cx0 = ax + q0 * (bx - ax)
                    cy0 = ay + q0 * (by - ay)
                    cx1 = ax + q1 * (bx - ax)
                    cy1 = ay + q1 * (by - ay)
                    tx0, ty0 = apply_to_point(layer.table_transform, cx0, cy0)
                    tx1, ty1 = apply_to_point(layer.table_transform, cx1, cy1)
                    if occ_verts.size == 0:
                        vis = [(0.0, 1.0)]
                    else:
                        v0, v1 = uncovered_intervals(tx0, ty0, tx1, ty1, occ_verts, occ_offsets)
                        vis = list(zip(v0.tolist(), v1.tolist()))
                    span = q1 - q0
                    for s0, s1 in vis:
                        # probe edges that stayed visible snap back to the
                        # exact clip boundary
                        g0 = t0 if s0 == 0.0 else q0 + s0 * span
                        g1 = t1 if s1 == 1.0 else q0 + s1 * span
                        px0, py0 = apply_to_point(
                            layer.table_transform, ax + g0 * (bx - ax), ay + g0 * (by - ay)
                        )
                        px1, py1 = apply_to_point(
                            layer.table_transform, ax + g1 * (bx - ax), ay + g1 * (by - ay)
                        )
                        if (px1 - px0) ** 2 + (py1 - py0) ** 2 > 1e-12:
                            segments.append(
                                VisibleSeamSegment(
                                    category, px0, py0, px1, py1, piece_index, g0, g1
                                )
                            )
        crossings = self._visible_crossings(state, layers)
        return GarmentObservation(tuple(segments), tuple(crossings), mask, cov)

    def _visible_crossings(
        self, state: GarmentState, layers: Sequence[_TableLayer]
    ) -> list[VisibleCrossing]:
        rng = _rng(_SALT_CONFIDENCE, state.rng_seed)
        noise = rng.uniform(0.0, 0.05, size=len(self.garment.crossings))
        placement = state.placement.matrix()
        out = []
        for idx, crossing in enumerate(self.garment.crossings):
            (gx, gy), _ = fold_trajectory(state.folds, crossing.x, crossing.y)
            qx, qy = apply_to_point(placement, gx, gy)
            top = None
            for layer in reversed(layers):
                hit = points_in_polygon(
                    np.asarray([qx]), np.asarray([qy]),
                    layer.ring_table[:, 0], layer.ring_table[:, 1],
                )
                if hit[0]:
                    top = layer
                    break
            if top is None:
                continue
            # visible only if the topmost layer here is the crossing's own
            # material (stitching shows through, so either face counts)
            px, py = apply_to_point(top.inverse, qx, qy)
            if abs(px - crossing.x) > 1e-6 or abs(py - crossing.y) > 1e-6:
                continue
            out.append(
                VisibleCrossing(
                    crossing.crossing_type, qx, qy, 1.0 - float(noise[idx]), top.front_up
                )
            )
        return out

    # -- actions ---------------------------------------------------------------

    #: probe offsets for locating grasped material; grasp candidates often sit
    #: exactly on visibility boundaries where a point-exact ray cast is
    #: knife-edged, and a gripper has finite width anyway
    _PROBES = np.array(
        [(0.0, 0.0)]
        + [
            (r * math.cos(a), r * math.sin(a))
            for r in (0.75, 1.5)
            for a in np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False)
        ]
    )

    def _locate_material(
        self, layers: Sequence[_TableLayer], p: tuple[float, float]
    ) -> tuple[_TableLayer, tuple[float, float]] | None:
        """Topmost layer under the grasp point, probing a 1.5 px neighborhood."""
        px = self._PROBES[:, 0] + p[0]
        py = self._PROBES[:, 1] + p[1]
        for layer in reversed(layers):
            hits = points_in_polygon(px, py, layer.ring_table[:, 0], layer.ring_table[:, 1])
            idx = int(np.argmax(hits))
            if hits[idx]:
                return layer, (float(px[idx]), float(py[idx]))
        return None

    def _stretched_folds(
        self,
        state: GarmentState,
        layers: Sequence[_TableLayer],
        p_left: tuple[float, float],
        p_right: tuple[float, float],
    ) -> set[int]:
        """Folds whose moved material the taut grasp segment passes over.

        Every layer's material shares one fold history (regions split at
        each fold line), so a fold's current flap footprint is the union
        of the layers it moved.
        """
        out: set[int] = set()
        for layer in layers:
            rp = layer.region.representative_point()
            _, moved = fold_trajectory(state.folds, rp.x, rp.y)
            if not moved:
                continue
            ring = layer.ring_table
            offsets = np.asarray([0, len(ring)], dtype=np.int64)
            t0s, t1s = uncovered_intervals(
                p_left[0], p_left[1], p_right[0], p_right[1], ring, offsets
            )
            fully_outside = t0s.size == 1 and t0s[0] == 0.0 and t1s[0] == 1.0
            if not fully_outside:
                out |= moved
        return out

    def _resettle_folds(
        self, survivors: Sequence[FoldLine], rng: np.random.Generator
    ) -> list[FoldLine]:
        """Let flinging agitate unresolved folds into fresh random ones."""
        p = self.config.resettle_prob
        if p <= 0.0 or not survivors:
            return list(survivors)
        out: list[FoldLine] = []
        footprint = self._outline_poly
        for fold in survivors:
            if rng.uniform() < p:
                redrawn, footprint = self._draw_fold(rng, footprint)
                if redrawn is not None:
                    out.append(redrawn)
                    continue
                # no workable redraw: the flap simply stays as it was
            out.append(fold)
            footprint, _ = self._fold_footprint(footprint, fold)
        return out

    def _clamped(self, placement: Placement, footprint_rings: Iterable[np.ndarray]) -> Placement:
        """Shift a placement minimally so the garment stays inside the frame."""
        m = placement.matrix()
        pts = np.vstack([apply_transform(m, r) for r in footprint_rings])
        margin = self.config.frame_margin_px
        shift_x = shift_y = 0.0
        minx, miny = pts.min(axis=0)
        maxx, maxy = pts.max(axis=0)
        if minx < margin:
            shift_x = margin - minx
        elif maxx > self.garment.width - margin:
            shift_x = self.garment.width - margin - maxx
        if miny < margin:
            shift_y = margin - miny
        elif maxy > self.garment.height - margin:
            shift_y = self.garment.height - margin - maxy
        if shift_x or shift_y:
            return Placement(placement.theta, placement.tx + shift_x, placement.ty + shift_y)
        return placement

    def _fold_footprint(self, footprint, fold: FoldLine):
        refl = reflection_matrix(fold.px, fold.py, fold.dx, fold.dy)
        keep, move = [], []
        for poly in getattr(footprint, "geoms", [footprint]):
            for piece in split_polygon_by_line(poly, fold.px, fold.py, fold.dx, fold.dy):
                rp = piece.representative_point()
                if line_side(fold.px, fold.py, fold.dx, fold.dy, rp.x, rp.y) > 0:
                    move.append(piece)
                else:
                    keep.append(piece)
        moved_area = sum(p.area for p in move)
        reflected = [transformed_polygon(refl, p) for p in move]
        return unary_union(keep + reflected), moved_area

    def _draw_fold(self, rng: np.random.Generator, footprint):
        minx, miny, maxx, maxy = footprint.bounds
        total = footprint.area
        for _ in range(40):
            px = rng.uniform(minx, maxx)
            py = rng.uniform(miny, maxy)
            angle = rng.uniform(0.0, math.pi)
            flip = rng.integers(0, 2)
            if not footprint.contains(Point(px, py)):
                continue
            dx, dy = math.cos(angle), math.sin(angle)
            if flip:
                dx, dy = -dx, -dy
            fold = FoldLine(float(px), float(py), dx, dy)
            new_footprint, moved_area = self._fold_footprint(footprint, fold)
            frac = moved_area / total
            if self.config.min_fold_fraction <= frac <= 1 - self.config.min_fold_fraction:
                return fold, new_footprint
        return None, footprint

    def _footprint_rings(self, footprint) -> list[np.ndarray]:
        return [ring_array(p) for p in getattr(footprint, "geoms", [footprint])]

    def randomize(self, seed: int) -> GarmentState:
        """Draw folded configurations until coverage falls below the threshold."""
        rng = _rng(_SALT_RANDOMIZE, seed)
        cfg = self.config
        for _ in range(cfg.randomize_max_attempts):
            k = int(rng.integers(1, cfg.max_folds + 1))
            folds: list[FoldLine] = []
            footprint = self._outline_poly
            for _ in range(k):
                fold, footprint = self._draw_fold(rng, footprint)
                if fold is None:
                    break
                folds.append(fold)
            if len(folds) != k:
                continue
            theta = rng.uniform(-math.pi, math.pi)
            rings = self._footprint_rings(footprint)
            rot = Placement(theta, 0.0, 0.0)
            pts = np.vstack([apply_transform(rot.matrix(), r) for r in rings])
            margin = cfg.frame_margin_px
            lo_x, hi_x = margin - pts[:, 0].min(), self.garment.width - margin - pts[:, 0].max()
            lo_y, hi_y = margin - pts[:, 1].min(), self.garment.height - margin - pts[:, 1].max()
            tx = rng.uniform(lo_x, hi_x) if lo_x < hi_x else (lo_x + hi_x) / 2
            ty = rng.uniform(lo_y, hi_y) if lo_y < hi_y else (lo_y + hi_y) / 2
            state = GarmentState(
                folds=tuple(folds),
                placement=Placement(float(theta), float(tx), float(ty)),
                rng_seed=int(rng.integers(0, 2**31 - 1)),
            )
            if self.render(state, coverage_only=True).ncov < cfg.randomize_ncov_threshold:
                return state
        raise SimulationError(
            f"randomize failed to reach ncov < {cfg.randomize_ncov_threshold} "
            f"in {cfg.randomize_max_attempts} attempts"
        )

    def grasp_fling(
        self,
        state: GarmentState,
        p_left: tuple[float, float],
        p_right: tuple[float, float],
        seed: int,
    ) -> GarmentState:
        """Grasp two points, shake out their folds, re-hang horizontally.

        Folds whose moved material carries a grasped point are resolved;
        the rest persist.  The garment is re-placed with the grasped
        feature pair horizontal at the release anchor, body hanging below,
        plus seeded rotation/translation noise.
        """
        layers = self._layers(state)
        canonical_pts = []
        for p in (p_left, p_right):
            located = self._locate_material(layers, p)
            if located is None:
                raise GraspMissError(p)
            top, (hx, hy) = located
            canonical_pts.append(apply_to_point(top.inverse, hx, hy))
        (lx, ly), (rx, ry) = canonical_pts
        rng = _rng(_SALT_FLING, seed)
        removed: set[int] = set()
        # grasped folds shake out
        for cx, cy in canonical_pts:
            _, moved = fold_trajectory(state.folds, cx, cy)
            removed |= moved
        # stretching the pair taut may also pull out folds whose flap lies
        # across the corridor between the grippers
        p_stretch = self.config.stretch_resolve_prob
        if p_stretch > 0.0:
            crossed = self._stretched_folds(state, layers, p_left, p_right)
            for i in sorted(crossed - removed):
                if rng.uniform() < p_stretch:
                    removed.add(i)
        survivors = [f for i, f in enumerate(state.folds) if i not in removed]
        residual = tuple(self._resettle_folds(survivors, rng))
        # grasped material points are fixed by the residual folds
        alpha = math.atan2(ry - ly, rx - lx)
        theta = -alpha
        mid = ((lx + rx) / 2.0, (ly + ry) / 2.0)
        residual_layers = build_layers(self._outline_poly, residual)
        footprint = unary_union(
            [transformed_polygon(l.transform, l.region) for l in residual_layers]
        )
        centroid = footprint.centroid
        rot = rotation_matrix(theta)
        _, cen_y = apply_to_point(rot, centroid.x, centroid.y)
        _, mid_y = apply_to_point(rot, mid[0], mid[1])
        if cen_y < mid_y:  # body must hang below the grasped edge
            theta += math.pi
        theta += math.radians(self.config.rotation_noise_deg) * rng.standard_normal()
        rot = rotation_matrix(theta)
        gx, gy = apply_to_point(rot, mid[0], mid[1])
        tx = self._anchor[0] - gx + self.config.translation_noise_px * rng.standard_normal()
        ty = self._anchor[1] - gy + self.config.translation_noise_px * rng.standard_normal()
        placement = self._clamped(
            Placement(float(theta), float(tx), float(ty)), self._footprint_rings(footprint)
        )
        return GarmentState(
            folds=residual,
            placement=placement,
            rng_seed=int(rng.integers(0, 2**31 - 1)),
        )

    # -- detector surrogate ------------------------------------------------------

    def detector_surrogate(self, obs: GarmentObservation, seed: int) -> SurrogateOutput:
        """Stand-in for the trained extractors: encode + seeded dropout/jitter."""
        cfg = self.config
        boxes = []
        for seg in obs.visible_segments:
            if seg.length() < cfg.min_segment_px:
                continue
            coords = [
                int(round(v)) for v in (seg.x1, seg.y1, seg.x2, seg.y2)
            ]
            coords[0] = min(max(coords[0], 0), self.garment.width - 1)
            coords[2] = min(max(coords[2], 0), self.garment.width - 1)
            coords[1] = min(max(coords[1], 0), self.garment.height - 1)
            coords[3] = min(max(coords[3], 0), self.garment.height - 1)
            if coords[0] == coords[2] and coords[1] == coords[3]:
                continue
            box = encode(SeamLineSegment(seg.category, *coords), cfg.codec)
            if box is not None:
                boxes.append(box)
        lists: list[tuple[CrossingDetection, ...]] = []
        for src_idx, source in enumerate((DetectorSource.SCD1, DetectorSource.SCD2)):
            rng = _rng(_SALT_DETECT, seed, src_idx)
            dets = []
            for vc in obs.visible_crossings:
                u_drop = rng.uniform()
                jx, jy = rng.normal(0.0, 1.0, size=2) * cfg.crossing_jitter_px
                c_noise = rng.uniform(0.0, 1.0) * cfg.confidence_noise
                recall = cfg.detector_recall[src_idx]
                if not vc.face_up:
                    recall *= cfg.backside_recall_factor
                if u_drop >= recall:
                    continue
                x = min(max(vc.x + jx, 0.0), self.garment.width - 1.0)
                y = min(max(vc.y + jy, 0.0), self.garment.height - 1.0)
                conf = min(max(vc.confidence - c_noise, 0.0), 1.0)
                dets.append(CrossingDetection(vc.crossing_type, x, y, conf, source))
            lists.append(tuple(dets))
        return SurrogateOutput(tuple(boxes), lists[0], lists[1])
