"""Simulated-user benchmark: concept tasks, threshold calibration,
per-run label sampling, and the multi-run experiment loop with CSV output.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .catalog import Catalog, Design
from .imaging import EmbeddingStore, aspect_ratio, channel_dominance
from .session import batch_auc, create_session, submit_feedback
from .preference import predict_ids

log = logging.getLogger(__name__)

SIGMOID_SLOPE = 8.0

# Target prevalences in percent: name -> (always, average).
TARGET_PREVALENCE = {
    "red": (5.5, 9.2),
    "blue": (0.5, 2.1),
    "fat": (7.0, 9.5),
    "thin": (3.6, 7.5),
    "circle-body": (5.0, 8.0),  # optional manual concept; defaults, not calibrated targets
}

ALWAYS_TOL_PP = 0.1
AVERAGE_TOL_PP = 0.3


class CalibrationError(ValueError):
    """Thresholds cannot reach the target prevalence on this catalog."""


@dataclass(frozen=True)
class ConceptTask:
    """A fixed scoring rule standing in for a human user's concept."""

    name: str
    direction: str  # "above": larger scores are positive; "below": smaller
    sigmoid_slope: float = SIGMOID_SLOPE


TASKS = {
    "red": ConceptTask("red", "above"),
    "blue": ConceptTask("blue", "above"),
    "fat": ConceptTask("fat", "above"),
    "thin": ConceptTask("thin", "below"),
    "circle-body": ConceptTask("circle-body", "above"),
}


def concept_score(task: ConceptTask, design: Design) -> float:
    if task.name in ("red", "blue"):
        return channel_dominance(design.image, design.mask, task.name)
    if task.name in ("fat", "thin"):
        return aspect_ratio(design.mask)
    if task.name == "circle-body":
        return _circle_fraction(design.mask)
    raise ValueError(f"unknown task {task.name!r}")


def _circle_fraction(mask: np.ndarray) -> float:
    """Fraction of foreground inside the equal-area circle at the centroid."""
    rows, cols = np.nonzero(mask)
    r0, c0 = rows.mean(), cols.mean()
    radius2 = len(rows) / np.pi
    inside = ((rows - r0) ** 2 + (cols - c0) ** 2) <= radius2
    return float(inside.mean())


def concept_scores(task: ConceptTask, catalog: Catalog) -> np.ndarray:
    return np.array([concept_score(task, d) for d in catalog.designs])


@dataclass(frozen=True)
class Thresholds:
    hard: float  # at or past this score the label is always positive
    soft: float  # at or past this (wrong side) the label is always negative


@dataclass(frozen=True)
class RunLabels:
    """One run's sampled labels; fixed once drawn."""

    run_seed: int
    ids: tuple[str, ...]
    labels: np.ndarray  # bool, aligned with ids

    def __getitem__(self, design_id: str) -> bool:
        return bool(self.labels[self._index[design_id]])

    @cached_property
    def _index(self) -> dict[str, int]:
        return {d: i for i, d in enumerate(self.ids)}


def _oriented(task: ConceptTask, scores: np.ndarray) -> np.ndarray:
    """Scores transformed so that larger always means more positive."""
    return scores if task.direction == "above" else -scores


def calibrate_thresholds(
    task: ConceptTask, catalog: Catalog, scores: np.ndarray | None = None
) -> Thresholds:
    """Pick the hard threshold as an empirical quantile matching the
    always-positive target, then bisect the soft threshold until the
    expected prevalence including the sigmoid band hits the average target."""
    if task.name not in TARGET_PREVALENCE:
        raise CalibrationError(f"no prevalence targets for task {task.name!r}")
    always_pct, average_pct = TARGET_PREVALENCE[task.name]
    if scores is None:
        scores = concept_scores(task, catalog)
    t = np.sort(_oriented(task, scores))[::-1]
    n = len(t)
    if t[0] == t[-1]:
        raise CalibrationError(f"task {task.name!r}: scores have zero variance")

    target_m = round(always_pct / 100.0 * n)
    # Scores can tie at the quantile boundary (e.g. pixel-quantized aspect
    # ratios); shift the split within the tolerance to a distinct-value gap.
    radius = int(ALWAYS_TOL_PP / 100.0 * n)
    m = None
    for delta in sorted(range(-radius, radius + 1), key=abs):
        k = target_m + delta
        if 1 <= k < n and t[k - 1] > t[k]:
            m = k
            break
    if m is None or abs(m / n * 100.0 - always_pct) > ALWAYS_TOL_PP:
        raise CalibrationError(
            f"task {task.name!r}: cannot place hard threshold for {always_pct}% on {n} designs"
        )
    hard = 0.5 * (t[m - 1] + t[m])

    target = average_pct / 100.0 * n

    def expected_positives(soft: float) -> float:
        u = np.clip((t - soft) / (hard - soft), 0.0, 1.0)
        p = 1.0 / (1.0 + np.exp(-task.sigmoid_slope * (u - 0.5)))
        p = np.where(t >= hard, 1.0, np.where(t < soft, 0.0, p))
        return float(p.sum())

    lo = float(t[-1]) - (hard - float(t[-1])) - 1e-9  # below every score
    hi = hard
    if expected_positives(lo) < target - 1e-9:
        raise CalibrationError(
            f"task {task.name!r}: average target {average_pct}% unreachable"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if expected_positives(mid) > target:
            lo = mid  # too many expected: raise the soft threshold
        else:
            hi = mid
    soft = hi
    got = expected_positives(soft) / n * 100.0
    if abs(got - average_pct) > AVERAGE_TOL_PP:
        raise CalibrationError(
            f"task {task.name!r}: calibrated average {got:.3f}% misses {average_pct}%"
        )
    if task.direction == "above":
        return Thresholds(hard=hard, soft=soft)
    return Thresholds(hard=-hard, soft=-soft)


def label_probabilities(
    task: ConceptTask, thresholds: Thresholds, scores: np.ndarray
) -> np.ndarray:
    """Per-design positive probability: 1 at or past the hard threshold, 0
    past the soft one, sigmoid of the normalized score in the band."""
    s = np.asarray(scores, dtype=np.float64)
    # (s - soft) / (hard - soft) is direction-correct for both orientations.
    denom = thresholds.hard - thresholds.soft
    u = np.clip((s - thresholds.soft) / denom, 0.0, 1.0)
    p = 1.0 / (1.0 + np.exp(-task.sigmoid_slope * (u - 0.5)))
    t = _oriented(task, s)
    t_hard = thresholds.hard if task.direction == "above" else -thresholds.hard
    t_soft = thresholds.soft if task.direction == "above" else -thresholds.soft
    return np.where(t >= t_hard, 1.0, np.where(t < t_soft, 0.0, p))


def assign_labels(
    task: ConceptTask,
    thresholds: Thresholds,
    catalog: Catalog,
    run_seed: int,
    scores: np.ndarray | None = None,
) -> RunLabels:
    """Draw this run's Bernoulli labels; deterministic in run_seed."""
    if scores is None:
        scores = concept_scores(task, catalog)
    p = label_probabilities(task, thresholds, scores)
    rng = np.random.default_rng(run_seed)
    draws = rng.random(len(p)) < p
    return RunLabels(run_seed=run_seed, ids=tuple(catalog.ids), labels=draws)


def simulated_select(run_labels: RunLabels, proposed: list[str]) -> list[str]:
    """The simulated user selects exactly the positive-labeled proposals."""
    return [pid for pid in proposed if run_labels[pid]]


# ---------------------------------------------------------------------------
# Experiment harness


@dataclass
class ExperimentConfig:
    task: str
    strategy: str
    rounds: int = 26
    runs: int = 90
    holdout: int = 2000
    base_seed: int = 0


@dataclass
class MetricsTable:
    strategy: str
    task: str
    rows: list[dict]
    errors: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["strategy", "task", "round", "auc_mean", "auc_std", "nsel_mean", "nsel_std", "runs_completed"]
        )
        for row in self.rows:
            writer.writerow(
                [
                    self.strategy,
                    self.task,
                    row["round"],
                    _fmt(row["auc_mean"]),
                    _fmt(row["auc_std"]),
                    _fmt(row["nsel_mean"]),
                    _fmt(row["nsel_std"]),
                    row["runs_completed"],
                ]
            )
        return buf.getvalue()

    def save_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def stratified_holdout(
    always_positive: np.ndarray, holdout: int, rng: np.random.Generator
) -> np.ndarray:
    """Indices of a holdout sample stratified on always-positive membership."""
    n = len(always_positive)
    if not (0 < holdout < n):
        raise ValueError(f"holdout {holdout} must lie in (0, {n})")
    pos_idx = np.flatnonzero(always_positive)
    neg_idx = np.flatnonzero(~always_positive)
    n_pos = round(holdout * len(pos_idx) / n)
    n_pos = min(max(n_pos, 0), min(holdout, len(pos_idx)))
    take_pos = rng.choice(pos_idx, size=n_pos, replace=False)
    take_neg = rng.choice(neg_idx, size=holdout - n_pos, replace=False)
    return np.sort(np.concatenate([take_pos, take_neg]))


def run_experiment(
    catalog: Catalog,
    config: ExperimentConfig,
    store: EmbeddingStore | None = None,
    thresholds: Thresholds | None = None,
) -> MetricsTable:
    """26-round x N-run protocol: per run, hold out designs, draw fresh
    labels, run a session with the simulated user, and record the held-out
    AUC of the current model plus selections per round."""
    task = TASKS[config.task]
    if store is None:
        store = EmbeddingStore.build(catalog)
    scores = concept_scores(task, catalog)
    if thresholds is None:
        thresholds = calibrate_thresholds(task, catalog, scores)
    probs = label_probabilities(task, thresholds, scores)
    always_positive = probs >= 1.0
    ids = np.array(catalog.ids)

    per_run_auc: list[list[float | None]] = []
    per_run_nsel: list[list[int]] = []
    errors: list[str] = []
    for run_index in range(config.runs):
        seed = config.base_seed + run_index
        try:
            labels = assign_labels(
                task, thresholds, catalog,
                run_seed=_derived_seed(config.base_seed, run_index, "labels"),
                scores=scores,
            )
            holdout_rng = np.random.default_rng(
                _derived_seed(config.base_seed, run_index, "holdout")
            )
            hold_idx = stratified_holdout(always_positive, config.holdout, holdout_rng)
            hold_ids = [str(d) for d in ids[hold_idx]]
            hold_labels = labels.labels[hold_idx]
            pool = [str(d) for d in np.delete(ids, hold_idx)]

            state = create_session(catalog, config.strategy, seed=seed, store=store, pool=pool)
            aucs: list[float | None] = []
            nsels: list[int] = []
            for _ in range(config.rounds):
                selected = simulated_select(labels, state.current_proposals)
                submit_feedback(state, selected)
                nsels.append(state.history[-1].num_selected)
                if state.model is not None:
                    hold_scores = predict_ids(state.model, store, hold_ids)
                    aucs.append(batch_auc(hold_scores, hold_labels))
                else:
                    aucs.append(None)
            per_run_auc.append(aucs)
            per_run_nsel.append(nsels)
        except Exception as exc:  # noqa: BLE001 - surface per-run failures
            log.exception("run %d failed", run_index)
            errors.append(f"run {run_index} (seed {seed}): {exc}")

    rows = []
    for r in range(config.rounds):
        aucs = [run[r] for run in per_run_auc if run[r] is not None]
        nsels = [run[r] for run in per_run_nsel]
        rows.append(
            {
                "round": r + 1,
                "auc_mean": float(np.mean(aucs)) if aucs else None,
                "auc_std": float(np.std(aucs)) if aucs else None,
                "nsel_mean": float(np.mean(nsels)) if nsels else None,
                "nsel_std": float(np.std(nsels)) if nsels else None,
                "runs_completed": len(per_run_nsel),
            }
        )
    table = MetricsTable(strategy=config.strategy, task=config.task, rows=rows, errors=errors)
    if errors:
        log.warning("experiment completed with %d failed runs; table is partial", len(errors))
    return table


def _derived_seed(base_seed: int, run_index: int, stream: str) -> int:
    """Independent deterministic stream per (run, purpose)."""
    tag = {"labels": 1, "holdout": 2}[stream]
    return int(np.random.SeedSequence([base_seed, run_index, tag]).generate_state(1)[0])
