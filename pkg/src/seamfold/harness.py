"""Closed-loop experiment harness: observe -> extract -> select -> act.

Runs seeded trials against the fold-stack simulator, routes the dual
decision matrices, applies the matrix update rules, and emits per-step
metrics CSVs, aggregate CSVs, and a JSONL episode log.  Everything is a
pure function of the experiment seed: re-running a configuration
reproduces every output byte.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .codec import grasp_candidates_from_box
from .fusion import merge
from .metrics import (
    EpisodeMetrics,
    StepMetrics,
    aggregate,
    iou,
    read_metrics_csv,
    write_aggregate_csv,
    write_metrics_csv,
)
from .policy import (
    CandidateSource,
    DecisionMatrix,
    GraspCandidate,
    GraspDecision,
    MatrixLabel,
    NoFeasiblePairError,
    TrialRecord,
    init_from_demos,
    load_matrix,
    pick_matrix,
    read_trial_log,
    record_trial,
    save_matrix,
    segment_type_from_category,
    segment_type_from_crossing,
    select,
)
from .sim import (
    GarmentObservation,
    GarmentState,
    GraspMissError,
    Simulator,
    SimulatorConfig,
    SurrogateOutput,
    load_garment,
    state_digest,
)


class ConfigError(Exception):
    """Invalid experiment configuration (CLI exit code 2)."""


class DataError(Exception):
    """Unreadable or inconsistent input data (CLI exit code 3)."""


class AblationMode(Enum):
    SIS = "sis"
    AB_DM = "ab_dm"
    AB_SI = "ab_si"
    AB_MI = "ab_mi"


@dataclass
class ExperimentConfig:
    n_trials: int = 20
    t_max: int = 5
    success_threshold: float = 0.85
    matrix_switch_threshold: float = 0.4
    ablation_mode: AblationMode = AblationMode.SIS
    seed: int = 0
    include_failures: bool = False
    geometry_path: str | None = None
    matrix_path: str | None = None
    out_dir: str = "out"
    sim: SimulatorConfig = field(default_factory=SimulatorConfig)

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ConfigError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.t_max < 1:
            raise ConfigError(f"t_max must be >= 1, got {self.t_max}")
        for name in ("success_threshold", "matrix_switch_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")


_CONFIG_KEYS = {
    "n_trials",
    "t_max",
    "success_threshold",
    "matrix_switch_threshold",
    "ablation_mode",
    "seed",
    "include_failures",
    "geometry_path",
    "matrix_path",
    "out_dir",
}


def load_experiment_config(path: str | Path | None = None, **overrides) -> ExperimentConfig:
    """Build a config from an optional JSON file plus keyword overrides."""
    values: dict = {}
    sim_values: dict = {}
    if path is not None:
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        sim_values = obj.pop("sim", {})
        unknown = set(obj) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(obj)
    values.update({k: v for k, v in overrides.items() if v is not None})
    if isinstance(values.get("ablation_mode"), str):
        try:
            values["ablation_mode"] = AblationMode(values["ablation_mode"].replace("-", "_"))
        except ValueError as exc:
            raise ConfigError(f"unknown ablation mode: {values['ablation_mode']}") from exc
    try:
        sim_cfg = replace(SimulatorConfig(), **sim_values) if sim_values else SimulatorConfig()
    except TypeError as exc:
        raise ConfigError(f"bad sim config: {exc}") from exc
    if "detector_recall" in sim_values:
        sim_cfg = replace(sim_cfg, detector_recall=tuple(sim_values["detector_recall"]))
    return ExperimentConfig(sim=sim_cfg, **values)


def _derive_seed(*parts: int) -> int:
    """Stable sub-seed derivation from integer parts."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


@dataclass
class MatrixPair:
    nint: DecisionMatrix
    int_: DecisionMatrix


def assemble_candidates(
    surrogate: SurrogateOutput, mode: AblationMode, sim: Simulator
) -> list[GraspCandidate]:
    """Turn surrogate detector output into typed grasp candidates."""
    fusion_cfg = sim.config.fusion
    if mode is AblationMode.AB_SI:
        fused = merge((), surrogate.scd2, fusion_cfg)
        segment_boxes = ()
    else:
        fused = merge(surrogate.scd1, surrogate.scd2, fusion_cfg)
        segment_boxes = surrogate.boxes
    candidates = [
        GraspCandidate(
            segment_type_from_crossing(d.crossing_type), d.x, d.y, CandidateSource.CROSSING
        )
        for d in fused
    ]
    for box in segment_boxes:
        for gp in grasp_candidates_from_box(box):
            candidates.append(
                GraspCandidate(
                    segment_type_from_category(gp.category),
                    gp.x,
                    gp.y,
                    CandidateSource.LINE_SEGMENT,
                )
            )
    return candidates


@dataclass
class StepOutcome:
    state: GarmentState
    obs: GarmentObservation
    action: str  # grasp_fling | randomize | grasp_miss
    csst: tuple[int, int] | None
    decision: GraspDecision | None
    excluded: bool


def run_episode_step(
    state: GarmentState,
    obs_prev: GarmentObservation,
    matrices: MatrixPair,
    sim: Simulator,
    cfg: ExperimentConfig,
    step_seed: int,
) -> StepOutcome:
    """One perception -> selection -> action cycle."""
    surrogate = sim.detector_surrogate(obs_prev, seed=_derive_seed(step_seed, 1))
    candidates = assemble_candidates(surrogate, cfg.ablation_mode, sim)
    if cfg.ablation_mode is AblationMode.AB_DM:
        matrix = matrices.nint
    else:
        matrix = pick_matrix(
            obs_prev.ncov, matrices.nint, matrices.int_, cfg.matrix_switch_threshold
        )
    action_seed = _derive_seed(step_seed, 2)
    try:
        decision = select(candidates, matrix)
    except NoFeasiblePairError:
        new_state = sim.randomize(action_seed)
        return StepOutcome(new_state, sim.render(new_state), "randomize", None, None, False)
    try:
        new_state = sim.grasp_fling(state, decision.p_left, decision.p_right, action_seed)
    except GraspMissError:
        return StepOutcome(state, sim.render(state), "grasp_miss", decision.csst, decision, True)
    return StepOutcome(new_state, sim.render(new_state), "grasp_fling", decision.csst, decision, False)


@dataclass
class TrialResult:
    metrics: EpisodeMetrics
    initial_ncov: float
    log_rows: list[dict]
    step_cssts: list[tuple[int, int] | None]
    step_excluded: list[bool]
    step_ncovs: list[float]


def run_trial(
    sim: Simulator,
    matrices: MatrixPair,
    cfg: ExperimentConfig,
    trial_index: int,
) -> TrialResult:
    state = sim.randomize(_derive_seed(cfg.seed, trial_index, 0))
    obs = sim.render(state)
    initial_ncov = obs.ncov
    rows: list[dict] = []
    steps: list[StepMetrics] = []
    cssts: list[tuple[int, int] | None] = []
    excluded_flags: list[bool] = []
    ncovs: list[float] = []
    for tau in range(1, cfg.t_max + 1):
        outcome = run_episode_step(
            state, obs, matrices, sim, cfg, _derive_seed(cfg.seed, trial_index, tau)
        )
        iou_val = iou(outcome.obs.mask, sim.goal_mask)
        steps.append(StepMetrics(outcome.obs.ncov, iou_val, outcome.excluded))
        cssts.append(outcome.csst)
        excluded_flags.append(outcome.excluded)
        ncovs.append(outcome.obs.ncov)
        rows.append(
            {
                "trial": trial_index,
                "step": tau,
                "state_digest": state_digest(outcome.state),
                "action": outcome.action,
                "csst": list(outcome.csst) if outcome.csst else None,
                "p_left": list(outcome.decision.p_left) if outcome.decision else None,
                "p_right": list(outcome.decision.p_right) if outcome.decision else None,
                "n_segments": len(outcome.obs.visible_segments),
                "n_crossings": len(outcome.obs.visible_crossings),
                "ncov": outcome.obs.ncov,
                "iou": iou_val,
                "excluded": outcome.excluded,
            }
        )
        state, obs = outcome.state, outcome.obs
    metrics = EpisodeMetrics(
        trial_id=f"trial{trial_index:04d}",
        initial_ncov=initial_ncov,
        per_step=tuple(steps),
    )
    return TrialResult(metrics, initial_ncov, rows, cssts, excluded_flags, ncovs)


def apply_matrix_updates(
    matrices: MatrixPair, trial: TrialResult, cfg: ExperimentConfig
) -> MatrixPair:
    """Credit the trial to the matrices per the dual-matrix update rules.

    The crumpled-configuration matrix receives one trial-level reward for
    the first step's combination when the trial started below the switch
    threshold.  The intermediate matrix receives a step-level reward (mean
    coverage over the remaining steps) for every step whose input
    configuration was at or above the threshold.  Failed grasps and
    fallback randomize steps credit nothing.
    """
    if cfg.ablation_mode is AblationMode.AB_MI:
        return matrices
    nint, m_int = matrices.nint, matrices.int_
    thresh = cfg.matrix_switch_threshold
    ncovs = trial.step_ncovs
    if (
        trial.initial_ncov < thresh
        and trial.step_cssts[0] is not None
        and not trial.step_excluded[0]
    ):
        nint = record_trial(nint, trial.step_cssts[0], ncovs, len(ncovs), cfg.t_max)
    if cfg.ablation_mode is not AblationMode.AB_DM:
        for tau in range(1, cfg.t_max + 1):
            prev_ncov = trial.initial_ncov if tau == 1 else ncovs[tau - 2]
            if (
                prev_ncov >= thresh
                and trial.step_cssts[tau - 1] is not None
                and not trial.step_excluded[tau - 1]
            ):
                remaining = ncovs[tau - 1 :]
                m_int = record_trial(m_int, trial.step_cssts[tau - 1], remaining, len(remaining), len(remaining))
    return MatrixPair(nint, m_int)


@dataclass
class ExperimentResult:
    metrics_csv: Path
    aggregate_csv: Path
    episode_log: Path
    matrix_paths: dict[str, Path]
    trials: list[EpisodeMetrics]
    aggregates: list


def _includable(trials: Sequence[EpisodeMetrics], include_failures: bool) -> list[EpisodeMetrics]:
    if include_failures:
        return list(trials)
    kept = [t for t in trials if not any(s.excluded for s in t.per_step)]
    if not kept:
        raise DataError(
            "every trial contains excluded (failed-grasp) steps; "
            "re-run with include_failures to aggregate them"
        )
    return kept


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    try:
        garment = load_garment(cfg.geometry_path)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot load garment geometry: {exc}") from exc
    sim = Simulator(garment, cfg.sim)
    if cfg.matrix_path is None:
        raise ConfigError("run requires an initialized matrix (matrix_path)")
    try:
        init = load_matrix(cfg.matrix_path)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot load matrix: {exc}") from exc
    if not init.cells:
        raise DataError(f"matrix {cfg.matrix_path} has no populated cells")
    matrices = MatrixPair(
        nint=init.relabeled(MatrixLabel.NINT), int_=init.relabeled(MatrixLabel.INT)
    )
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trials: list[EpisodeMetrics] = []
    log_rows: list[dict] = []
    for trial_index in range(cfg.n_trials):
        result = run_trial(sim, matrices, cfg, trial_index)
        matrices = apply_matrix_updates(matrices, result, cfg)
        trials.append(result.metrics)
        log_rows.extend(result.log_rows)
    metrics_csv = out_dir / "metrics.csv"
    aggregate_csv = out_dir / "aggregate.csv"
    episode_log = out_dir / "episodes.jsonl"
    write_metrics_csv(metrics_csv, trials, cfg.success_threshold)
    aggs = aggregate(_includable(trials, cfg.include_failures), cfg.success_threshold)
    write_aggregate_csv(aggregate_csv, aggs)
    with open(episode_log, "w", encoding="utf-8") as fh:
        for row in log_rows:
            fh.write(json.dumps(row) + "\n")
    matrix_paths = {}
    for name, matrix in (("nint", matrices.nint), ("int", matrices.int_)):
        path = out_dir / f"matrix_{name}.json"
        save_matrix(matrix, path)
        matrix_paths[name] = path
    return ExperimentResult(metrics_csv, aggregate_csv, episode_log, matrix_paths, trials, aggs)


def ingest_demo_log(path: str | Path, out_path: str | Path | None = None) -> DecisionMatrix:
    """Initialize a decision matrix from a demonstration trial log."""
    try:
        records = read_trial_log(path)
    except OSError as exc:
        raise DataError(f"cannot read demo log: {exc}") from exc
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if not records:
        warnings.warn(f"demo log {path} is empty; matrix has no populated cells", RuntimeWarning)
    matrix = init_from_demos(records)
    if out_path is not None:
        save_matrix(matrix, out_path)
    return matrix


def report(
    metrics_paths: Sequence[str | Path],
    threshold: float = 0.85,
    include_failures: bool = False,
    out_path: str | Path | None = None,
) -> list:
    """Aggregate one or more metrics CSVs and return per-step statistics."""
    trials: list[EpisodeMetrics] = []
    for p in metrics_paths:
        try:
            trials.extend(read_metrics_csv(p))
        except OSError as exc:
            raise DataError(f"cannot read metrics CSV: {exc}") from exc
        except ValueError as exc:
            raise DataError(str(exc)) from exc
    if not trials:
        raise DataError("no trials found in the given metrics files")
    aggs = aggregate(_includable(trials, include_failures), threshold)
    if out_path is not None:
        write_aggregate_csv(out_path, aggs)
    return aggs
