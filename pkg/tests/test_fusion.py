"""Detector fusion: dedup, caps, ordering, and the extraction oracle."""

from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from seamfold.fusion import (
    CrossingDetection,
    CrossingType,
    DetectionRecord,
    DetectorSource,
    FusionConfig,
    merge,
    read_detections,
    write_detections,
)

CFG = FusionConfig()


def det(c, x, y, conf, source=DetectorSource.SCD1):
    return CrossingDetection(CrossingType(c), x, y, conf, source)


def test_dedup_keeps_higher_confidence():
    a = det(1, 100, 100, 0.9, DetectorSource.SCD1)
    b = det(1, 102, 101, 0.8, DetectorSource.SCD2)
    assert merge([a], [b], FusionConfig(dedup_radius=10)) == [a]


def test_union_with_empty_side():
    b = det(3, 50, 50, 0.7, DetectorSource.SCD2)
    assert merge([], [b], CFG) == [b]


def test_cap_keeps_top_confidence():
    dets = [det(1, 100, 100, 0.9), det(1, 400, 100, 0.8), det(1, 700, 100, 0.7)]
    out = merge(dets, [], CFG)
    assert [d.confidence for d in out] == [0.9, 0.8]


def test_merge_idempotent():
    scd1 = [det(1, 100, 100, 0.9), det(2, 300, 500, 0.6)]
    scd2 = [det(1, 105, 100, 0.85, DetectorSource.SCD2), det(3, 50, 50, 0.4, DetectorSource.SCD2)]
    out = merge(scd1, scd2, CFG)
    assert merge(out, [], CFG) == out


def _oracle_merge(pool, cfg):
    """Independent formulation: repeatedly extract the best remaining detection."""
    remaining = sorted(
        pool,
        key=lambda d: (
            int(d.crossing_type),
            -d.confidence,
            d.x,
            d.y,
            0 if d.source is DetectorSource.SCD1 else 1,
        ),
    )
    kept = []
    counts = {}
    while remaining:
        best = remaining.pop(0)
        suppressed_by_kept = any(
            k.crossing_type == best.crossing_type
            and math.dist((k.x, k.y), (best.x, best.y)) <= cfg.dedup_radius
            for k in kept
        )
        if suppressed_by_kept:
            continue
        kept.append(best)
    out = []
    for d in kept:
        n = counts.get(d.crossing_type, 0)
        if n < cfg.max_per_type[d.crossing_type]:
            out.append(d)
            counts[d.crossing_type] = n + 1
    return out


detections = st.builds(
    det,
    st.integers(1, 3),
    st.integers(0, 200),
    st.integers(0, 200),
    st.sampled_from([round(0.05 * k, 2) for k in range(1, 21)]),
    st.sampled_from(list(DetectorSource)),
)
det_lists = st.lists(detections, max_size=12)


@given(det_lists, det_lists)
def test_merge_matches_extraction_oracle(scd1, scd2):
    cfg = FusionConfig(dedup_radius=25)
    assert merge(scd1, scd2, cfg) == _oracle_merge(scd1 + scd2, cfg)


@given(det_lists, det_lists, st.randoms())
def test_merge_invariants(scd1, scd2, pyrandom):
    out = merge(scd1, scd2, CFG)
    pool = scd1 + scd2
    # no synthesis
    assert all(d in pool for d in out)
    # caps
    for t in CrossingType:
        assert sum(d.crossing_type == t for d in out) <= CFG.max_per_type[t]
    # pairwise separation per type
    for i, a in enumerate(out):
        for b in out[i + 1 :]:
            if a.crossing_type == b.crossing_type:
                assert math.dist((a.x, a.y), (b.x, b.y)) > CFG.dedup_radius
    # sorted by (type, confidence desc)
    keys = [(int(d.crossing_type), -d.confidence) for d in out]
    assert keys == sorted(keys)
    # input-order invariance (symmetry up to the source tag in the elements)
    shuffled = list(pool)
    pyrandom.shuffle(shuffled)
    assert merge(shuffled, [], CFG) == merge(scd2, scd1, CFG) == out
    # idempotence
    assert merge(out, [], CFG) == out


def test_chain_suppression_is_transitive_free():
    # B within radius of A, C within radius of B but not of A: keep A and C
    a = det(1, 0, 0, 0.9)
    b = det(1, 15, 0, 0.8)
    c = det(1, 30, 0, 0.7)
    out = merge([a, b, c], [], FusionConfig(dedup_radius=20))
    assert out == [a, c]


def test_detection_files_roundtrip(tmp_path):
    rec = DetectionRecord(
        "img000",
        (
            det(1, 100, 100, 0.9, DetectorSource.SCD1),
            det(2, 300.5, 500.25, 0.6, DetectorSource.SCD2),
        ),
    )
    path = tmp_path / "detections.jsonl"
    write_detections(path, [rec])
    assert read_detections(path) == [rec]


def test_bad_detection_confidence_rejected():
    with pytest.raises(ValueError, match="confidence"):
        det(1, 0, 0, 1.5)
