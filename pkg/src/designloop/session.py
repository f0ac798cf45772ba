"""Interactive exploration session: propose, ingest feedback, retrain, repeat.

One session is a serial state machine. Batch metrics for a round are always
computed with the model the user just experienced (pre-update scores).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .catalog import Catalog
from .imaging import EmbeddingStore
from .preference import (
    PreferenceModel,
    ThompsonEnsemble,
    ensemble_update,
    predict_ids,
    train_preference,
)
from .proposer import (
    GRID_SIZE,
    ProposalContext,
    ProposalRequest,
    STRATEGY_NAMES,
    StrategyMix,
    propose,
    propose_rand,
)

TRANSCRIPT_SCHEMA = 1
LOG_LOSS_CLAMP = 1e-6


class SessionError(ValueError):
    """Invalid feedback or operation on an ended session."""


class ReplayError(ValueError):
    """A transcript failed to reproduce its recorded session."""


@dataclass
class RoundRecord:
    """Outcome of one completed round.

    model_version is the retrain counter of the model whose scores produced
    batch_auc/log_loss (0 while cold); the post-feedback retrain bumps the
    session counter afterwards.
    """

    round: int
    proposed: list[str]
    selected: list[str]
    batch_auc: float | None
    log_loss: float | None
    num_selected: int
    model_version: int


@dataclass
class SessionState:
    id: str
    catalog: Catalog
    store: EmbeddingStore
    strategy: str
    seed: int
    rng: np.random.Generator
    allowed_ids: list[str]
    n_per_round: int = GRID_SIZE
    mix: StrategyMix = field(default_factory=StrategyMix)
    round: int = 1
    current_proposals: list[str] = field(default_factory=list)
    labeled: dict[str, bool] = field(default_factory=dict)
    model: PreferenceModel | None = None
    model_version: int = 0
    ensemble: ThompsonEnsemble = field(default_factory=ThompsonEnsemble.empty)
    history: list[RoundRecord] = field(default_factory=list)
    status: str = "active"
    _transcript: dict | None = None


def create_session(
    catalog: Catalog,
    strategy: str,
    seed: int,
    store: EmbeddingStore | None = None,
    pool: list[str] | None = None,
    n_per_round: int = GRID_SIZE,
    thompson_k: int = 5,
    thompson_p: float = 0.75,
    mix: StrategyMix | None = None,
) -> SessionState:
    """Start a session; the first round is a uniform draw for every strategy."""
    if strategy not in STRATEGY_NAMES:
        raise SessionError(f"unknown strategy {strategy!r}; expected one of {STRATEGY_NAMES}")
    allowed = list(pool) if pool is not None else list(catalog.ids)
    unknown = [d for d in allowed if d not in catalog]
    if unknown:
        raise SessionError(f"pool ids not in catalog: {unknown[:3]}")
    if len(allowed) < n_per_round:
        raise SessionError(
            f"catalog pool has {len(allowed)} designs; need at least {n_per_round}"
        )
    state = SessionState(
        id=f"session-{seed}",
        catalog=catalog,
        store=store if store is not None else EmbeddingStore.build(catalog),
        strategy=strategy,
        seed=seed,
        rng=np.random.default_rng(seed),
        allowed_ids=allowed,
        n_per_round=n_per_round,
        mix=mix or StrategyMix(),
        ensemble=ThompsonEnsemble.empty(k=thompson_k, p=thompson_p),
    )
    state.current_proposals = propose_rand(
        ProposalRequest(pool=allowed, n=n_per_round, rng=state.rng)
    )
    return state


def submit_feedback(state: SessionState, selected_ids: list[str]) -> tuple[SessionState, list[str]]:
    """Label the current round, record pre-update metrics, retrain, and draw
    the next round's proposals."""
    if state.status != "active":
        raise SessionError("session has ended")
    current = set(state.current_proposals)
    foreign = [d for d in selected_ids if d not in current]
    if foreign:
        raise SessionError(f"selected ids not in current proposals: {foreign[:3]}")

    selected = set(selected_ids)
    proposals = list(state.current_proposals)
    flags = np.array([pid in selected for pid in proposals])

    if state.model is not None:
        scores = predict_ids(state.model, state.store, proposals)
        auc = batch_auc(scores, flags)
        loss = batch_log_loss(scores, flags)
    else:
        auc = None
        loss = None

    record = RoundRecord(
        round=state.round,
        proposed=proposals,
        selected=[pid for pid in proposals if pid in selected],
        batch_auc=auc,
        log_loss=loss,
        num_selected=int(flags.sum()),
        model_version=state.model_version,
    )

    newly_labeled = [(pid, bool(f)) for pid, f in zip(proposals, flags)]
    for pid, f in newly_labeled:
        state.labeled[pid] = f

    values = list(state.labeled.values())
    if any(values) and not all(values):
        state.model = train_preference(list(state.labeled.items()), state.store)
        state.model_version += 1
    state.ensemble = ensemble_update(state.ensemble, newly_labeled, state.rng, state.store)

    state.history.append(record)
    state.round += 1

    shown = set(state.labeled)
    req = ProposalRequest(
        pool=[d for d in state.allowed_ids if d not in shown],
        n=state.n_per_round,
        exclusions=shown,
        last_selected=record.selected,
        rng=state.rng,
    )
    ctx = ProposalContext(
        store=state.store, model=state.model, ensemble=state.ensemble, mix=state.mix
    )
    state.current_proposals = propose(state.strategy, req, ctx)
    return state, list(state.current_proposals)


def end_session(state: SessionState) -> dict:
    """End the session (idempotent) and return its transcript."""
    if state._transcript is not None:
        return state._transcript
    state.status = "ended"
    state._transcript = {
        "schema_version": TRANSCRIPT_SCHEMA,
        "session_id": state.id,
        "strategy": state.strategy,
        "seed": state.seed,
        "n_per_round": state.n_per_round,
        "catalog_fingerprint": state.catalog.fingerprint(),
        "restricted_pool": (
            state.allowed_ids if len(state.allowed_ids) != len(state.catalog) else None
        ),
        "rounds": [asdict(r) for r in state.history],
        "labels": {k: bool(v) for k, v in state.labeled.items()},
        "model": state.model.to_json() if state.model is not None else None,
    }
    return state._transcript


def save_transcript(transcript: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(transcript, indent=1))


def load_transcript(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def replay_transcript(catalog: Catalog, transcript: dict, store: EmbeddingStore | None = None) -> dict:
    """Re-run a recorded session from its seed and verify that every proposal
    set and metric reproduces bit-exactly. Returns the regenerated transcript."""
    if transcript.get("catalog_fingerprint") != catalog.fingerprint():
        raise ReplayError("transcript was recorded against a different catalog")
    state = create_session(
        catalog,
        transcript["strategy"],
        transcript["seed"],
        store=store,
        pool=transcript.get("restricted_pool"),
        n_per_round=transcript["n_per_round"],
    )
    for rec in transcript["rounds"]:
        if state.current_proposals != rec["proposed"]:
            raise ReplayError(f"round {rec['round']}: proposals diverged")
        submit_feedback(state, rec["selected"])
        got = asdict(state.history[-1])
        if got != rec:
            raise ReplayError(f"round {rec['round']}: metrics diverged: {got} != {rec}")
    return end_session(state)


# ---------------------------------------------------------------------------
# Batch metrics


def batch_auc(scores: np.ndarray, labels: np.ndarray) -> float | None:
    """Mann-Whitney rank AUC with ties counted half; None when single-class."""
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(np.asarray(scores, dtype=np.float64), method="average")
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def batch_log_loss(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood with scores clamped to [1e-6, 1-1e-6]."""
    p = np.clip(np.asarray(scores, dtype=np.float64), LOG_LOSS_CLAMP, 1.0 - LOG_LOSS_CLAMP)
    y = np.asarray(labels, dtype=np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))
