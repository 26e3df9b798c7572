"""Coverage and alignment metrics over boolean garment masks.

Masks are exact polygon rasterizations of simulator ground truth, so both
metrics are deterministic pixel counts: normalized coverage against the
flattened garment's area, and IoU against the goal-configuration mask in
the fixed table frame.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

#: Success threshold used in the reported experiments.
DEFAULT_SUCCESS_THRESHOLD = 0.85

#: Coverage ratios above 1 can occur when a rotated placement rasterizes to
#: slightly more pixels than the axis-aligned flat garment; cap the excess.
NCOV_CEILING = 1.05


@dataclass(frozen=True, eq=False)
class CoverageMask:
    """Boolean garment-occupancy grid, shape (height, width)."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        if self.bits.ndim != 2 or self.bits.dtype != np.bool_:
            raise ValueError("mask must be a 2D boolean array")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoverageMask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(
            np.array_equal(self.bits, other.bits)
        )

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))


def ncov(mask: CoverageMask, cov_max: int) -> float:
    """Covered-pixel count normalized by the flattened garment's area."""
    if cov_max <= 0:
        raise ValueError(f"cov_max must be positive, got {cov_max}")
    value = mask.popcount() / cov_max
    if value > 1.0:
        warnings.warn(
            f"normalized coverage {value:.4f} exceeds 1 (rasterization overshoot)",
            RuntimeWarning,
            stacklevel=2,
        )
    return min(value, NCOV_CEILING)


def iou(mask: CoverageMask, goal: CoverageMask) -> float:
    """Intersection-over-union of two same-size masks (0 if both empty)."""
    if mask.bits.shape != goal.bits.shape:
        raise ValueError(
            f"mask shapes differ: {mask.bits.shape} vs {goal.bits.shape}"
        )
    inter = int(np.count_nonzero(mask.bits & goal.bits))
    union = int(np.count_nonzero(mask.bits | goal.bits))
    return inter / union if union else 0.0


@dataclass(frozen=True, slots=True)
class StepMetrics:
    ncov: float
    iou: float
    excluded: bool = False


@dataclass(frozen=True)
class EpisodeMetrics:
    """Per-step metrics of one trial."""

    trial_id: str
    initial_ncov: float
    per_step: tuple[StepMetrics, ...]


def success_at(metrics: EpisodeMetrics, step: int, threshold: float) -> bool:
    """Whether coverage AND alignment reach the threshold at a step (1-based)."""
    if not 1 <= step <= len(metrics.per_step):
        raise IndexError(f"step {step} outside [1, {len(metrics.per_step)}]")
    s = metrics.per_step[step - 1]
    return s.ncov >= threshold and s.iou >= threshold


@dataclass(frozen=True, slots=True)
class StepAggregate:
    step: int
    n: int
    mean_ncov: float
    ci95_ncov: float
    mean_iou: float
    ci95_iou: float
    success_rate: float
    degenerate_ci: bool


def _mean_ci(values: Sequence[float]) -> tuple[float, float, bool]:
    n = len(values)
    mean = math.fsum(values) / n
    if n == 1:
        return mean, 0.0, True
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, 1.96 * math.sqrt(var) / math.sqrt(n), False


def aggregate(
    trials: Sequence[EpisodeMetrics],
    threshold: float = DEFAULT_SUCCESS_THRESHOLD,
) -> list[StepAggregate]:
    """Per-step mean, normal-approximation 95% CI, and success rate."""
    if not trials:
        raise ValueError("no trials to aggregate")
    lengths = {len(t.per_step) for t in trials}
    if len(lengths) != 1:
        raise ValueError(f"trials have unequal step counts: {sorted(lengths)}")
    (t_max,) = lengths
    out = []
    for step in range(1, t_max + 1):
        ncovs = [t.per_step[step - 1].ncov for t in trials]
        ious = [t.per_step[step - 1].iou for t in trials]
        mean_n, ci_n, degenerate = _mean_ci(ncovs)
        mean_i, ci_i, _ = _mean_ci(ious)
        successes = sum(success_at(t, step, threshold) for t in trials)
        out.append(
            StepAggregate(
                step=step,
                n=len(trials),
                mean_ncov=mean_n,
                ci95_ncov=ci_n,
                mean_iou=mean_i,
                ci95_iou=ci_i,
                success_rate=successes / len(trials),
                degenerate_ci=degenerate,
            )
        )
    return out


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------


def _success_column(threshold: float) -> str:
    return f"success@{threshold:g}"


def write_metrics_csv(
    path: str | Path,
    trials: Iterable[EpisodeMetrics],
    threshold: float = DEFAULT_SUCCESS_THRESHOLD,
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial_id", "step", "ncov", "iou", _success_column(threshold), "excluded"])
        for trial in trials:
            for step, sm in enumerate(trial.per_step, 1):
                ok = sm.ncov >= threshold and sm.iou >= threshold
                writer.writerow(
                    [trial.trial_id, step, sm.ncov, sm.iou, int(ok), int(sm.excluded)]
                )


def read_metrics_csv(path: str | Path) -> list[EpisodeMetrics]:
    """Rebuild per-trial metrics from a metrics CSV (initial_ncov unknown)."""
    rows: dict[str, list[tuple[int, StepMetrics]]] = {}
    order: list[str] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"trial_id", "step", "ncov", "iou"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{path}: missing columns {sorted(required)}")
        for lineno, row in enumerate(reader, 2):
            try:
                tid = row["trial_id"]
                step = int(row["step"])
                sm = StepMetrics(
                    ncov=float(row["ncov"]),
                    iou=float(row["iou"]),
                    excluded=bool(int(row.get("excluded", "0") or 0)),
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}: line {lineno}: bad metrics row: {exc}") from exc
            if tid not in rows:
                rows[tid] = []
                order.append(tid)
            rows[tid].append((step, sm))
    trials = []
    for tid in order:
        steps = sorted(rows[tid])
        if [s for s, _ in steps] != list(range(1, len(steps) + 1)):
            raise ValueError(f"{path}: trial {tid}: step numbers not contiguous from 1")
        trials.append(
            EpisodeMetrics(
                trial_id=tid,
                initial_ncov=float("nan"),
                per_step=tuple(sm for _, sm in steps),
            )
        )
    return trials


def write_aggregate_csv(path: str | Path, aggregates: Sequence[StepAggregate]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["step", "mean_ncov", "ci95_ncov", "mean_iou", "ci95_iou", "success_rate"]
        )
        for agg in aggregates:
            writer.writerow(
                [agg.step, agg.mean_ncov, agg.ci95_ncov, agg.mean_iou, agg.ci95_iou, agg.success_rate]
            )
