"""Merging of two seam-crossing detector outputs.

Two detectors look for the same crossings on different inputs (raw image
vs. seam-overlay image), which raises recall but produces duplicates.  A
garment exposes only a small number of each crossing type, so the merged
set is deduplicated by proximity and capped per type.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class CrossingType(IntEnum):
    SHOULDER = 1
    BOTTOM_HEM = 2
    NECK_POINT = 3


class DetectorSource(Enum):
    SCD1 = "scd1"
    SCD2 = "scd2"


_SOURCE_RANK = {DetectorSource.SCD1: 0, DetectorSource.SCD2: 1}


@dataclass(frozen=True, slots=True)
class CrossingDetection:
    """One detected seam crossing with its confidence and origin."""

    crossing_type: CrossingType
    x: float
    y: float
    confidence: float
    source: DetectorSource

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")


def _default_caps() -> dict[CrossingType, int]:
    # a flat T-shirt exposes two of each crossing type
    return {t: 2 for t in CrossingType}


@dataclass(frozen=True)
class FusionConfig:
    max_per_type: Mapping[CrossingType, int] = field(default_factory=_default_caps)
    dedup_radius: float = 20.0

    def __post_init__(self) -> None:
        if any(cap < 1 for cap in self.max_per_type.values()):
            raise ValueError("every per-type cap must be >= 1")
        if self.dedup_radius < 0:
            raise ValueError("dedup_radius must be >= 0")


def _priority(det: CrossingDetection) -> tuple:
    return (int(det.crossing_type), -det.confidence, det.x, det.y, _SOURCE_RANK[det.source])


def merge(
    scd1_out: Sequence[CrossingDetection],
    scd2_out: Sequence[CrossingDetection],
    cfg: FusionConfig,
) -> list[CrossingDetection]:
    """Fuse two detection lists into one capped, deduplicated list.

    Same-type detections within ``dedup_radius`` collapse onto the
    higher-confidence one; each type keeps at most its cap, by descending
    confidence.  Ties break on (x, y, scd1-before-scd2), so the result is
    independent of input ordering.
    """
    pool = sorted(list(scd1_out) + list(scd2_out), key=_priority)
    r2 = cfg.dedup_radius**2
    kept: list[CrossingDetection] = []
    for det in pool:
        absorbed = any(
            k.crossing_type == det.crossing_type
            and (k.x - det.x) ** 2 + (k.y - det.y) ** 2 <= r2
            for k in kept
        )
        if not absorbed:
            kept.append(det)
    counts: dict[CrossingType, int] = {}
    out: list[CrossingDetection] = []
    for det in kept:
        cap = cfg.max_per_type.get(det.crossing_type, 0)
        n = counts.get(det.crossing_type, 0)
        if n < cap:
            out.append(det)
            counts[det.crossing_type] = n + 1
    return out


# ---------------------------------------------------------------------------
# Detection list I/O (JSONL, one object per image)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class DetectionRecord:
    image_id: str
    detections: tuple[CrossingDetection, ...]


def read_detections(path: str | Path) -> list[DetectionRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                dets = tuple(
                    CrossingDetection(
                        CrossingType(d["c"]),
                        d["x"],
                        d["y"],
                        d["confidence"],
                        DetectorSource(d["source"]),
                    )
                    for d in obj["detections"]
                )
                records.append(DetectionRecord(obj["image_id"], dets))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}: line {lineno}: bad detection record: {exc}") from exc
    return records


def write_detections(path: str | Path, records: Iterable[DetectionRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "image_id": rec.image_id,
                "detections": [
                    {
                        "c": int(d.crossing_type),
                        "x": d.x,
                        "y": d.y,
                        "confidence": d.confidence,
                        "source": d.source.value,
                    }
                    for d in rec.detections
                ],
            }
            fh.write(json.dumps(obj) + "\n")
