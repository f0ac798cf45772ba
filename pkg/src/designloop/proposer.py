"""Proposal strategies filling each round's candidate grid.

Strategies are pure functions of (request, models, rng). Every strategy
returns distinct ids drawn from the request pool; the shared fallback for
cold models or exhausted candidates is a uniform draw.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .imaging import EmbeddingStore
from .preference import PreferenceModel, ThompsonEnsemble, predict_ids

log = logging.getLogger(__name__)

GRID_SIZE = 18
EXPLOIT_POOL_SIZE = 300
THOMPSON_SAMPLE_SIZE = 50
THOMPSON_MAX_RETRIES = 20
NN_NEIGHBORS = 10
REJECTION_ATTEMPT_FACTOR = 200

STRATEGY_NAMES = ("rand", "rand_reject", "exploit", "thompson", "nn", "everything")


@dataclass
class ProposalRequest:
    pool: list[str]  # catalog ids minus exclusions
    n: int
    exclusions: set[str] = field(default_factory=set)
    last_selected: list[str] = field(default_factory=list)
    rng: np.random.Generator = field(default_factory=np.random.default_rng)


@dataclass(frozen=True)
class StrategyMix:
    """Per-strategy slot counts for the combined method."""

    rand: int = 4
    exploit: int = 1
    thompson: int = 9
    nn: int = 4

    @property
    def total(self) -> int:
        return self.rand + self.exploit + self.thompson + self.nn


@dataclass
class ProposalContext:
    """Models and embeddings shared by the strategies for one round."""

    store: EmbeddingStore
    model: PreferenceModel | None = None
    ensemble: ThompsonEnsemble | None = None
    mix: StrategyMix = field(default_factory=StrategyMix)


def _take_uniform(rng: np.random.Generator, candidates: list[str], n: int) -> list[str]:
    if n <= 0:
        return []
    if len(candidates) <= n:
        if len(candidates) < n:
            log.warning("pool exhausted: %d candidates for %d slots", len(candidates), n)
        return [candidates[i] for i in rng.permutation(len(candidates))]
    idx = rng.choice(len(candidates), size=n, replace=False)
    return [candidates[i] for i in idx]


def _fill_uniform(rng: np.random.Generator, pool: list[str], chosen: list[str], n: int) -> list[str]:
    have = set(chosen)
    remaining = [p for p in pool if p not in have]
    return list(chosen) + _take_uniform(rng, remaining, n - len(chosen))


def propose_rand(req: ProposalRequest) -> list[str]:
    """Uniform draw without replacement."""
    return _take_uniform(req.rng, req.pool, req.n)


def propose_rand_rejection(
    req: ProposalRequest, model: PreferenceModel | None, store: EmbeddingStore
) -> list[str]:
    """Sample from the preference distribution via rejection sampling.

    Uniform draws are accepted with probability predict(d); after
    200 * n attempts the remainder is filled uniformly. Cold model
    degrades to the plain uniform draw.
    """
    if model is None:
        return propose_rand(req)
    accepted: list[str] = []
    have: set[str] = set()
    attempts = 0
    max_attempts = REJECTION_ATTEMPT_FACTOR * req.n
    chunk = 64
    while len(accepted) < req.n and attempts < max_attempts:
        take = min(chunk, max_attempts - attempts)
        idx = req.rng.integers(len(req.pool), size=take)
        coin = req.rng.random(take)
        ids = [req.pool[i] for i in idx]
        probs = predict_ids(model, store, ids)
        for d, u, p in zip(ids, coin, probs):
            attempts += 1
            if d in have:
                continue
            if u < p:
                accepted.append(d)
                have.add(d)
                if len(accepted) == req.n:
                    break
    return _fill_uniform(req.rng, req.pool, accepted, req.n)


def propose_exploit(
    req: ProposalRequest,
    model: PreferenceModel | None,
    store: EmbeddingStore,
    pool_size: int = EXPLOIT_POOL_SIZE,
) -> list[str]:
    """Top-scoring designs from a uniform sample of a few hundred."""
    if model is None:
        return propose_rand(req)
    sample = _take_uniform(req.rng, req.pool, min(pool_size, len(req.pool)))
    if req.n >= len(sample):
        return sample
    probs = predict_ids(model, store, sample)
    order = sorted(range(len(sample)), key=lambda i: (-probs[i], sample[i]))
    return [sample[i] for i in order[: req.n]]


def propose_thompson(
    req: ProposalRequest,
    ensemble: ThompsonEnsemble | None,
    store: EmbeddingStore,
    sample_size: int = THOMPSON_SAMPLE_SIZE,
) -> list[str]:
    """Per slot: sample one ensemble member, then take its top pick from a
    fresh uniform sample. Untrained members pick uniformly (their scores
    are uniform noise, so the argmax is a uniform draw)."""
    if ensemble is None or not req.pool:
        return propose_rand(req)
    chosen: list[str] = []
    have: set[str] = set()
    for _ in range(req.n):
        for _ in range(THOMPSON_MAX_RETRIES + 1):
            member = ensemble.members[int(req.rng.integers(ensemble.k))]
            sample = _take_uniform(req.rng, req.pool, min(sample_size, len(req.pool)))
            if not sample:
                break
            if member is None:
                pick = sample[int(req.rng.integers(len(sample)))]
            else:
                probs = predict_ids(member, store, sample)
                best = min(range(len(sample)), key=lambda i: (-probs[i], sample[i]))
                pick = sample[best]
            if pick not in have:
                chosen.append(pick)
                have.add(pick)
                break
    return _fill_uniform(req.rng, req.pool, chosen, req.n)


def propose_nn(req: ProposalRequest, store: EmbeddingStore) -> list[str]:
    """Neighborhood sampling around the previous round's selections,
    alternating modalities round-robin."""
    if not req.last_selected:
        return propose_rand(req)
    pairs = [(sel, m) for sel in req.last_selected for m in store.modalities]
    pool_mats = {m: store.vectors(req.pool, m) for m in store.modalities}
    neighbor_cache: dict[tuple[str, str], list[str]] = {}
    chosen: list[str] = []
    have: set[str] = set()
    for slot in range(req.n):
        sel, modality = pairs[slot % len(pairs)]
        key = (sel, modality)
        if key not in neighbor_cache:
            neighbor_cache[key] = _nearest_rows(
                pool_mats[modality], req.pool, store.vector(sel, modality)
            )
        options = [d for d in neighbor_cache[key] if d not in have]
        if options:
            pick = options[int(req.rng.integers(len(options)))]
            chosen.append(pick)
            have.add(pick)
    return _fill_uniform(req.rng, req.pool, chosen, req.n)


def _nearest_rows(
    mat: np.ndarray, pool: list[str], query: np.ndarray, k: int = NN_NEIGHBORS
) -> list[str]:
    d2 = ((mat - query) ** 2).sum(axis=1)
    k = min(k, len(pool))
    kth = np.partition(d2, k - 1)[k - 1]
    candidates = np.flatnonzero(d2 <= kth)  # everything tied at the cut included
    order = sorted(candidates.tolist(), key=lambda i: (d2[i], pool[i]))
    return [pool[i] for i in order[:k]]


def _nearest_in_pool(
    store: EmbeddingStore, pool: list[str], design_id: str, modality: str, k: int = NN_NEIGHBORS
) -> list[str]:
    return _nearest_rows(store.vectors(pool, modality), pool, store.vector(design_id, modality), k)


def propose_everything(
    req: ProposalRequest,
    model: PreferenceModel | None,
    ensemble: ThompsonEnsemble | None,
    store: EmbeddingStore,
    mix: StrategyMix | None = None,
) -> list[str]:
    """Combined strategy: rejection-RAND + EXPLOIT + THOMPSON + NN slots,
    deduplicated, refilled uniformly, and shuffled for display."""
    mix = mix or StrategyMix()
    if mix.total != req.n:
        raise ValueError(f"strategy mix totals {mix.total}, round needs {req.n}")

    def sub(n: int) -> ProposalRequest:
        return ProposalRequest(
            pool=req.pool, n=n, exclusions=req.exclusions,
            last_selected=req.last_selected, rng=req.rng,
        )

    parts = (
        propose_rand_rejection(sub(mix.rand), model, store)
        + propose_exploit(sub(mix.exploit), model, store)
        + propose_thompson(sub(mix.thompson), ensemble, store)
        + propose_nn(sub(mix.nn), store)
    )
    deduped: list[str] = []
    have: set[str] = set()
    for d in parts:
        if d not in have:
            deduped.append(d)
            have.add(d)
    result = _fill_uniform(req.rng, req.pool, deduped[: req.n], req.n)
    req.rng.shuffle(result)
    return result


def propose(strategy: str, req: ProposalRequest, ctx: ProposalContext) -> list[str]:
    """Dispatch by stable strategy identifier."""
    if strategy == "rand":
        return propose_rand(req)
    if strategy == "rand_reject":
        return propose_rand_rejection(req, ctx.model, ctx.store)
    if strategy == "exploit":
        return propose_exploit(req, ctx.model, ctx.store)
    if strategy == "thompson":
        return propose_thompson(req, ctx.ensemble, ctx.store)
    if strategy == "nn":
        return propose_nn(req, ctx.store)
    if strategy == "everything":
        return propose_everything(req, ctx.model, ctx.ensemble, ctx.store, ctx.mix)
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGY_NAMES}")
