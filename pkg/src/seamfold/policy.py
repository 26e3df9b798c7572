"""Decision matrices over seam-type combinations and grasp-pair selection.

A grasp action is characterized by the unordered pair of seam-segment
types its two points lie on.  Each pair indexes a cell of an
upper-triangular score matrix holding the running mean of the rewards
observed for that combination.  Selection picks the best-scoring feasible
combination and, within it, the most distant candidate pair.

Two matrices are kept at run time: one consulted (and credited) for
crumpled configurations, one for intermediate configurations at or above
the coverage switching threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .codec import SeamCategory
from .fusion import CrossingType

SCHEMA_VERSION = 1

#: Coverage at or above this value counts as an intermediate configuration.
INTERMEDIATE_NCOV_THRESHOLD = 0.4


class SeamSegmentType(IntEnum):
    """Unified type index over crossing types and seam-line categories."""

    SHOULDER = 1
    BOTTOM_HEM = 2
    NECK_POINT = 3
    SOLID = 4
    DOTTED = 5
    NECKLINE = 6


_CATEGORY_TO_TYPE = {
    SeamCategory.SOLID: SeamSegmentType.SOLID,
    # inward seams are scored as dotted: too rare to earn their own cell
    SeamCategory.INWARD: SeamSegmentType.DOTTED,
    SeamCategory.DOTTED: SeamSegmentType.DOTTED,
    SeamCategory.NECKLINE: SeamSegmentType.NECKLINE,
}


def segment_type_from_category(category: SeamCategory) -> SeamSegmentType:
    return _CATEGORY_TO_TYPE[category]


def segment_type_from_crossing(crossing_type: CrossingType) -> SeamSegmentType:
    return SeamSegmentType(int(crossing_type))


class MatrixLabel(Enum):
    INIT = "init"
    NINT = "nint"
    INT = "int"


class CandidateSource(Enum):
    LINE_SEGMENT = "line_segment"
    CROSSING = "crossing"


@dataclass(frozen=True, slots=True)
class CellStats:
    """Running mean score and trial count for one type combination."""

    u: float
    m: int


@dataclass(frozen=True)
class DecisionMatrix:
    """Upper-triangular (k >= l) score matrix keyed by type pairs."""

    label: MatrixLabel
    t_max: int
    cells: Mapping[tuple[int, int], CellStats]

    def cell(self, csst: tuple[int, int]) -> CellStats | None:
        return self.cells.get(csst)

    def relabeled(self, label: MatrixLabel) -> "DecisionMatrix":
        return replace(self, label=label)


def empty_matrix(label: MatrixLabel = MatrixLabel.INIT, t_max: int = 5) -> DecisionMatrix:
    return DecisionMatrix(label=label, t_max=t_max, cells={})


def canonical_csst(a: int, b: int) -> tuple[int, int]:
    """Order a type pair as (k, l) with k >= l."""
    return (a, b) if a >= b else (b, a)


def _validate_csst(csst: tuple[int, int]) -> None:
    k, l = csst
    if not (1 <= l <= k <= len(SeamSegmentType)):
        raise ValueError(f"invalid type combination {csst}: need 1 <= l <= k <= 6")


def _validate_ncovs(values: Sequence[float]) -> None:
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"normalized coverage {v} outside [0, 1]")


def trial_reward(ncov_per_step: Sequence[float], t: int) -> float:
    """Mean normalized coverage over the steps of one trial."""
    if t < 1 or len(ncov_per_step) != t:
        raise ValueError(f"expected exactly t={t} coverage values, got {len(ncov_per_step)}")
    _validate_ncovs(ncov_per_step)
    return math.fsum(ncov_per_step) / t


def pad_ncovs(raw_ncovs: Sequence[float], t_max: int) -> list[float]:
    """Extend a truncated coverage series by repeating its last value.

    Trials that flatten the garment early skip the remaining steps; the
    final coverage stands in for the skipped observations.
    """
    if not raw_ncovs:
        raise ValueError("cannot pad an empty coverage series")
    if len(raw_ncovs) > t_max:
        raise ValueError(f"series longer ({len(raw_ncovs)}) than t_max ({t_max})")
    return list(raw_ncovs) + [raw_ncovs[-1]] * (t_max - len(raw_ncovs))


def record_trial(
    matrix: DecisionMatrix,
    csst: tuple[int, int],
    raw_ncovs: Sequence[float],
    completed_at: int,
    t_max: int | None = None,
) -> DecisionMatrix:
    """Fold one trial's reward into the matrix cell for its combination.

    ``raw_ncovs`` holds the coverage after each executed step; it is padded
    to ``t_max`` before averaging.  The cell mean is updated incrementally
    and stays the exact running mean of every reward recorded into it.
    """
    _validate_csst(csst)
    if t_max is None:
        t_max = matrix.t_max
    if len(raw_ncovs) != completed_at:
        raise ValueError(
            f"raw_ncovs has {len(raw_ncovs)} entries but completed_at={completed_at}"
        )
    if not 1 <= completed_at <= t_max:
        raise ValueError(f"completed_at={completed_at} outside [1, {t_max}]")
    padded = pad_ncovs(raw_ncovs, t_max)
    reward = trial_reward(padded, t_max)
    cells = dict(matrix.cells)
    prev = cells.get(csst, CellStats(0.0, 0))
    m = prev.m + 1
    cells[csst] = CellStats(prev.u + (reward - prev.u) / m, m)
    return replace(matrix, cells=cells)


# ---------------------------------------------------------------------------
# Demonstration / execution logs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class TrialRecord:
    """One logged unfolding trial attributed to a type combination."""

    csst: tuple[int, int]
    ncov_per_step: tuple[float, ...]
    completed_at_step: int

    def __post_init__(self) -> None:
        _validate_csst(self.csst)
        if not 1 <= self.completed_at_step <= len(self.ncov_per_step):
            raise ValueError(
                f"completed_at_step={self.completed_at_step} outside "
                f"[1, {len(self.ncov_per_step)}]"
            )
        _validate_ncovs(self.ncov_per_step)
        last = self.ncov_per_step[self.completed_at_step - 1]
        tail = self.ncov_per_step[self.completed_at_step :]
        if any(v != last for v in tail):
            raise ValueError("entries past completed_at_step must repeat the last coverage")


def init_from_demos(
    records: Iterable[TrialRecord], t_max: int | None = None
) -> DecisionMatrix:
    """Build the initial matrix by folding demonstration trials in order."""
    records = list(records)
    if t_max is None:
        t_max = len(records[0].ncov_per_step) if records else 5
    matrix = empty_matrix(MatrixLabel.INIT, t_max)
    for rec in records:
        if len(rec.ncov_per_step) != t_max:
            raise ValueError(
                f"trial has {len(rec.ncov_per_step)} steps, expected t_max={t_max}"
            )
        matrix = record_trial(
            matrix,
            rec.csst,
            rec.ncov_per_step[: rec.completed_at_step],
            rec.completed_at_step,
            t_max,
        )
    return matrix


def read_trial_log(path: str | Path) -> list[TrialRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(
                    TrialRecord(
                        csst=(obj["csst"][0], obj["csst"][1]),
                        ncov_per_step=tuple(obj["ncov_per_step"]),
                        completed_at_step=obj["completed_at_step"],
                    )
                )
            except (KeyError, IndexError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}: line {lineno}: bad trial record: {exc}") from exc
    return records


def write_trial_log(path: str | Path, records: Iterable[TrialRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "schema_version": SCHEMA_VERSION,
                "csst": list(rec.csst),
                "ncov_per_step": list(rec.ncov_per_step),
                "completed_at_step": rec.completed_at_step,
            }
            fh.write(json.dumps(obj) + "\n")


# ---------------------------------------------------------------------------
# Matrix serialization
# ---------------------------------------------------------------------------


def save_matrix(matrix: DecisionMatrix, path: str | Path) -> None:
    obj = {
        "schema_version": SCHEMA_VERSION,
        "label": matrix.label.value,
        "T_max": matrix.t_max,
        "cells": [
            {"k": k, "l": l, "u": stats.u, "M": stats.m}
            for (k, l), stats in sorted(matrix.cells.items())
        ],
    }
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def load_matrix(path: str | Path) -> DecisionMatrix:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        cells = {}
        for c in obj["cells"]:
            csst = (c["k"], c["l"])
            _validate_csst(csst)
            cells[csst] = CellStats(c["u"], c["M"])
        return DecisionMatrix(MatrixLabel(obj["label"]), obj["T_max"], cells)
    except (KeyError, ValueError, TypeError) as exc:
        raise ValueError(f"{path}: bad matrix file: {exc}") from exc


# ---------------------------------------------------------------------------
# Selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class GraspCandidate:
    """A typed grasp-point candidate in image coordinates."""

    type_id: SeamSegmentType
    x: float
    y: float
    provenance: CandidateSource


@dataclass(frozen=True, slots=True)
class GraspDecision:
    """Selected grasp pair; left/right assigned by image x-coordinate."""

    p_left: tuple[float, float]
    p_right: tuple[float, float]
    csst: tuple[int, int]
    score: float


class NoFeasiblePairError(Exception):
    """No candidate pair maps to a populated matrix cell."""


def pick_matrix(
    ncov_prev: float,
    m_nint: DecisionMatrix,
    m_int: DecisionMatrix,
    threshold: float = INTERMEDIATE_NCOV_THRESHOLD,
) -> DecisionMatrix:
    """Route to the intermediate matrix at or above the coverage threshold."""
    if not 0.0 <= ncov_prev <= 1.0:
        raise ValueError(f"ncov_prev={ncov_prev} outside [0, 1]")
    return m_int if ncov_prev >= threshold else m_nint


def _ordered_pair(
    a: GraspCandidate, b: GraspCandidate
) -> tuple[tuple[float, float], tuple[float, float]]:
    pa, pb = (a.x, a.y), (b.x, b.y)
    return (pa, pb) if pa <= pb else (pb, pa)


def select(
    candidates: Sequence[GraspCandidate], matrix: DecisionMatrix
) -> GraspDecision:
    """Choose the grasp pair with the best-scoring feasible combination.

    All unordered candidate pairs are considered (same-type pairs
    included; coincident points are skipped since two hands cannot grasp
    one point).  The combination with the highest cell score wins; within
    it, the most distant pair.  Ties: equal scores prefer the combination
    whose best pair is farther apart, then the smaller (k, l); equal
    distances prefer the lexicographically smaller point pair.
    """
    if len(candidates) < 2:
        raise NoFeasiblePairError(f"need at least two candidates, got {len(candidates)}")
    # per feasible combination: (max squared distance, lex-smallest pair at it)
    best_pairs: dict[tuple[int, int], tuple[float, tuple, tuple]] = {}
    for i in range(len(candidates)):
        a = candidates[i]
        for j in range(i + 1, len(candidates)):
            b = candidates[j]
            if a.x == b.x and a.y == b.y:
                continue
            csst = canonical_csst(int(a.type_id), int(b.type_id))
            if csst not in matrix.cells:
                continue
            d2 = (a.x - b.x) ** 2 + (a.y - b.y) ** 2
            pair = _ordered_pair(a, b)
            prev = best_pairs.get(csst)
            if prev is None or d2 > prev[0] or (d2 == prev[0] and pair < (prev[1], prev[2])):
                best_pairs[csst] = (d2, pair[0], pair[1])
    if not best_pairs:
        raise NoFeasiblePairError("no candidate pair maps to a populated matrix cell")
    best_csst = min(
        best_pairs,
        key=lambda c: (-matrix.cells[c].u, -best_pairs[c][0], c),
    )
    d2, p_left, p_right = best_pairs[best_csst]
    return GraspDecision(
        p_left=p_left,
        p_right=p_right,
        csst=best_csst,
        score=matrix.cells[best_csst].u,
    )
