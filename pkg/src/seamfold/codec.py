"""Oriented bounding-box encoding of straight seam line segments.

A straight seam segment is labeled by its category and two endpoints.
For detector training/inference the segment is converted to a bounding box
whose class also carries one of four orientation subclasses.  Thin,
near-axis segments would produce degenerate boxes, so they are widened to
half of their dominant extent; segments tiny in both extents are dropped.

Box centers are kept at exact half-pixel precision (the midpoint of two
integer endpoints is either integral or ``*.5``, both exact in binary
floats).  This keeps encode/decode a true inverse on the dominant axes and
makes recategorization commute with image flips and rotations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable, Sequence


class SeamCategory(IntEnum):
    """Seam pattern category (pattern printed/stitched on the garment)."""

    SOLID = 1
    DOTTED = 2
    INWARD = 3
    NECKLINE = 4


class OrientationSubclass(IntEnum):
    """Orientation of the segment inside its bounding box."""

    DOWNWARD_DIAGONAL = 1
    UPWARD_DIAGONAL = 2
    HORIZONTAL = 3
    VERTICAL = 4


class ImageTransform(Enum):
    """Image-level augmentations that require label recategorization."""

    FLIP_HORIZONTAL = "flip_horizontal"
    FLIP_VERTICAL = "flip_vertical"
    ROTATE_90CW = "rotate_90cw"
    ROTATE_180 = "rotate_180"
    ROTATE_90CCW = "rotate_90ccw"


#: Transforms that exchange image width and height.
_AXIS_SWAPPING = {ImageTransform.ROTATE_90CW, ImageTransform.ROTATE_90CCW}


@dataclass(frozen=True, slots=True)
class CodecConfig:
    """Label-encoding parameters for one image resolution."""

    lambda_thres: int = 10
    width: int = 1280
    height: int = 1024

    def __post_init__(self) -> None:
        if self.lambda_thres < 1:
            raise ValueError(f"lambda_thres must be >= 1, got {self.lambda_thres}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")


@dataclass(frozen=True, slots=True)
class SeamLineSegment:
    """A straight seam piece with endpoints in image coordinates (y down)."""

    category: SeamCategory
    x1: float
    y1: float
    x2: float
    y2: float

    def endpoints(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (self.x1, self.y1), (self.x2, self.y2)


@dataclass(frozen=True, slots=True)
class OrientedSeamBox:
    """Bounding-box label with orientation subclass and seam category."""

    subclass: OrientationSubclass
    category: SeamCategory
    x: float
    y: float
    w_hat: int
    h_hat: int


@dataclass(frozen=True, slots=True)
class SeamGraspPoint:
    """A grasp-point candidate on a decoded seam segment."""

    x: float
    y: float
    category: SeamCategory


def _validate_segment(seg: SeamLineSegment, cfg: CodecConfig) -> None:
    for x, y in seg.endpoints():
        if not (0 <= x < cfg.width and 0 <= y < cfg.height):
            raise ValueError(
                f"segment endpoint ({x}, {y}) outside image bounds "
                f"[0,{cfg.width})x[0,{cfg.height})"
            )
    if seg.x1 == seg.x2 and seg.y1 == seg.y2:
        raise ValueError(f"degenerate segment: both endpoints at ({seg.x1}, {seg.y1})")


def encode(seg: SeamLineSegment, cfg: CodecConfig) -> OrientedSeamBox | None:
    """Convert a seam segment to an oriented box label.

    Returns ``None`` when both extents fall under ``lambda_thres`` (the
    label is dropped: boxes that small destabilize detector training).
    """
    _validate_segment(seg, cfg)
    w = abs(seg.x2 - seg.x1)
    h = abs(seg.y2 - seg.y1)
    x = (seg.x1 + seg.x2) / 2
    y = (seg.y1 + seg.y2) / 2
    lam = cfg.lambda_thres
    if w < lam and h < lam:
        return None
    if w < lam <= h:
        # near-vertical: widen to half the height; floor-of-1 guards the
        # lambda_thres == 1 corner where int(h/2) could be zero
        return OrientedSeamBox(
            OrientationSubclass.VERTICAL, seg.category, x, y, max(int(h // 2), 1), int(h)
        )
    if h < lam <= w:
        return OrientedSeamBox(
            OrientationSubclass.HORIZONTAL, seg.category, x, y, int(w), max(int(w // 2), 1)
        )
    if (seg.x1 < seg.x2 and seg.y1 > seg.y2) or (seg.x1 > seg.x2 and seg.y1 < seg.y2):
        return OrientedSeamBox(
            OrientationSubclass.UPWARD_DIAGONAL, seg.category, x, y, int(w), int(h)
        )
    return OrientedSeamBox(
        OrientationSubclass.DOWNWARD_DIAGONAL, seg.category, x, y, int(w), int(h)
    )


def decode(box: OrientedSeamBox) -> SeamLineSegment:
    """Recover the canonical segment represented by a box label.

    Endpoints are emitted left-to-right (top-to-bottom for vertical
    boxes).  For horizontal/vertical boxes the minor-axis coordinate of
    the original segment is unrecoverable and collapses to the box center.
    """
    if box.w_hat <= 0 or box.h_hat <= 0:
        raise ValueError(f"box extents must be positive, got {box.w_hat}x{box.h_hat}")
    x_lo = box.x - box.w_hat / 2
    x_hi = box.x + box.w_hat / 2
    y_lo = box.y - box.h_hat / 2
    y_hi = box.y + box.h_hat / 2
    sub = box.subclass
    if sub is OrientationSubclass.DOWNWARD_DIAGONAL:
        pts = (x_lo, y_lo, x_hi, y_hi)
    elif sub is OrientationSubclass.UPWARD_DIAGONAL:
        pts = (x_lo, y_hi, x_hi, y_lo)
    elif sub is OrientationSubclass.HORIZONTAL:
        pts = (x_lo, box.y, x_hi, box.y)
    else:
        pts = (box.x, y_lo, box.x, y_hi)
    return SeamLineSegment(box.category, *pts)


def transformed_size(transform: ImageTransform, width: int, height: int) -> tuple[int, int]:
    """Image dimensions after applying ``transform``."""
    if transform in _AXIS_SWAPPING:
        return height, width
    return width, height


def transform_point(
    x: float, y: float, transform: ImageTransform, width: int, height: int
) -> tuple[float, float]:
    """Map a pixel coordinate under an image transform of a WxH image."""
    if transform is ImageTransform.FLIP_HORIZONTAL:
        return width - 1 - x, y
    if transform is ImageTransform.FLIP_VERTICAL:
        return x, height - 1 - y
    if transform is ImageTransform.ROTATE_180:
        return width - 1 - x, height - 1 - y
    if transform is ImageTransform.ROTATE_90CW:
        return height - 1 - y, x
    if transform is ImageTransform.ROTATE_90CCW:
        return y, width - 1 - x
    raise ValueError(f"unknown transform: {transform!r}")


def transform_segment(
    seg: SeamLineSegment, transform: ImageTransform, cfg: CodecConfig
) -> SeamLineSegment:
    """Apply an image transform to both endpoints of a segment."""
    x1, y1 = transform_point(seg.x1, seg.y1, transform, cfg.width, cfg.height)
    x2, y2 = transform_point(seg.x2, seg.y2, transform, cfg.width, cfg.height)
    return SeamLineSegment(seg.category, x1, y1, x2, y2)


def recategorize(
    box: OrientedSeamBox, transform: ImageTransform, cfg: CodecConfig
) -> OrientedSeamBox:
    """Relabel a box after its image is flipped or rotated.

    Equivalent to decoding, transforming the segment, and re-encoding
    against the transformed image dimensions.  Never drops: extents are
    preserved (possibly swapped), so the size gate cannot newly trigger.
    """
    seg = transform_segment(decode(box), transform, cfg)
    new_w, new_h = transformed_size(transform, cfg.width, cfg.height)
    out = encode(seg, replace(cfg, width=new_w, height=new_h))
    if out is None:  # pragma: no cover - unreachable for valid boxes
        raise AssertionError("recategorization dropped a valid box")
    return out


def grasp_candidates_from_box(box: OrientedSeamBox) -> list[SeamGraspPoint]:
    """Grasp-point candidates for a box: segment endpoints and midpoint."""
    seg = decode(box)
    mid_x = (seg.x1 + seg.x2) / 2
    mid_y = (seg.y1 + seg.y2) / 2
    return [
        SeamGraspPoint(seg.x1, seg.y1, box.category),
        SeamGraspPoint(mid_x, mid_y, box.category),
        SeamGraspPoint(seg.x2, seg.y2, box.category),
    ]


# ---------------------------------------------------------------------------
# Label file I/O (JSONL, one object per image)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class AnnotationRecord:
    """Raw segment annotations for one image."""

    image_id: str
    width: int
    height: int
    segments: tuple[SeamLineSegment, ...]


@dataclass(frozen=True, slots=True)
class EncodedRecord:
    """Encoded box labels for one image."""

    image_id: str
    width: int
    height: int
    boxes: tuple[OrientedSeamBox, ...]


def _num(v: float) -> int | float:
    # keep integral values as ints so files round-trip bit-exactly
    return int(v) if isinstance(v, float) and v.is_integer() else v


def read_annotations(path: str | Path) -> list[AnnotationRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                segments = tuple(
                    SeamLineSegment(
                        SeamCategory(s["j"]), s["x1"], s["y1"], s["x2"], s["y2"]
                    )
                    for s in obj["segments"]
                )
                records.append(
                    AnnotationRecord(obj["image_id"], obj["width"], obj["height"], segments)
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}: line {lineno}: bad annotation record: {exc}") from exc
    return records


def write_annotations(path: str | Path, records: Iterable[AnnotationRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "image_id": rec.image_id,
                "width": rec.width,
                "height": rec.height,
                "segments": [
                    {
                        "j": int(s.category),
                        "x1": _num(s.x1),
                        "y1": _num(s.y1),
                        "x2": _num(s.x2),
                        "y2": _num(s.y2),
                    }
                    for s in rec.segments
                ],
            }
            fh.write(json.dumps(obj) + "\n")


def read_encoded_labels(path: str | Path) -> list[EncodedRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                boxes = tuple(
                    OrientedSeamBox(
                        OrientationSubclass(b["s_i"]),
                        SeamCategory(b["s_j"]),
                        b["x"],
                        b["y"],
                        b["w_hat"],
                        b["h_hat"],
                    )
                    for b in obj["boxes"]
                )
                records.append(
                    EncodedRecord(obj["image_id"], obj["width"], obj["height"], boxes)
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}: line {lineno}: bad encoded record: {exc}") from exc
    return records


def write_encoded_labels(path: str | Path, records: Iterable[EncodedRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "image_id": rec.image_id,
                "width": rec.width,
                "height": rec.height,
                "boxes": [
                    {
                        "s_i": int(b.subclass),
                        "s_j": int(b.category),
                        "x": _num(b.x),
                        "y": _num(b.y),
                        "w_hat": b.w_hat,
                        "h_hat": b.h_hat,
                    }
                    for b in rec.boxes
                ],
            }
            fh.write(json.dumps(obj) + "\n")


def encode_record(rec: AnnotationRecord, lambda_thres: int = 10) -> EncodedRecord:
    """Encode every segment of an annotation record, dropping tiny ones."""
    cfg = CodecConfig(lambda_thres=lambda_thres, width=rec.width, height=rec.height)
    boxes = tuple(b for b in (encode(s, cfg) for s in rec.segments) if b is not None)
    return EncodedRecord(rec.image_id, rec.width, rec.height, boxes)
