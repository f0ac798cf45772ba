"""User preference model: per-modality RBF SVMs stacked by logistic regression,
plus the bootstrap model ensemble used for Thompson-style proposals.

Models are immutable; every update is a full retrain producing a new value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .imaging import EmbeddingStore
from .svm import DEFAULT_C, SvmModel, kernel_width, train_svm

COMBINER_L2 = 1e-4
COMBINER_GRAD_TOL = 1e-8

THOMPSON_K = 5
THOMPSON_P = 0.75


class ColdStartError(ValueError):
    """Raised when training is requested without both feedback classes."""


def _logistic(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_logistic(
    features: np.ndarray,
    y01: np.ndarray,
    l2: float = COMBINER_L2,
    grad_tol: float = COMBINER_GRAD_TOL,
    max_iter: int = 200,
) -> np.ndarray:
    """Newton fit of L2-regularized logistic regression.

    Returns weights shaped (m + 1,), intercept last. The penalty applies to
    the whole parameter vector; loss is mean NLL + (l2/2)||theta||^2.
    """
    x = np.column_stack([features, np.ones(len(features))])
    y = np.asarray(y01, dtype=np.float64)
    theta = np.zeros(x.shape[1])
    n = len(y)

    def loss_grad(th: np.ndarray):
        z = x @ th
        p = _logistic(z)
        nll = np.mean(np.logaddexp(0.0, z) - y * z)
        loss = nll + 0.5 * l2 * th @ th
        grad = x.T @ (p - y) / n + l2 * th
        return loss, grad, p

    loss, grad, p = loss_grad(theta)
    for _ in range(max_iter):
        if np.linalg.norm(grad) < grad_tol:
            break
        w = p * (1.0 - p)
        hess = (x.T * w) @ x / n + l2 * np.eye(len(theta))
        step = np.linalg.solve(hess, grad)
        # Backtracking keeps Newton safe when the combiner saturates.
        scale = 1.0
        for _ in range(50):
            cand = theta - scale * step
            new_loss, new_grad, new_p = loss_grad(cand)
            if new_loss <= loss + 1e-12:
                theta, loss, grad, p = cand, new_loss, new_grad, new_p
                break
            scale *= 0.5
        else:
            break
    return theta


@dataclass
class PreferenceModel:
    """Stacked classifier mapping modality embeddings to a like-probability."""

    svms: dict[str, SvmModel]
    modalities: tuple[str, ...]
    combiner: np.ndarray  # per-modality weights + intercept
    trained_on: int

    def decision_values(self, embeddings: dict[str, np.ndarray]) -> np.ndarray:
        vals = []
        for m in self.modalities:
            if m not in embeddings:
                raise KeyError(f"missing modality {m!r} in embeddings")
            vals.append(self.svms[m].decision_function(embeddings[m]))
        return np.column_stack(vals)

    def to_json(self) -> str:
        return json.dumps(
            {
                "modalities": list(self.modalities),
                "svms": {m: s.to_dict() for m, s in self.svms.items()},
                "combiner": self.combiner.tolist(),
                "trained_on": self.trained_on,
            }
        )

    @classmethod
    def from_json(cls, payload: str) -> "PreferenceModel":
        data = json.loads(payload)
        return cls(
            svms={m: SvmModel.from_dict(s) for m, s in data["svms"].items()},
            modalities=tuple(data["modalities"]),
            combiner=np.asarray(data["combiner"], dtype=np.float64),
            trained_on=int(data["trained_on"]),
        )


def train_preference(
    labeled: list[tuple[str, bool]],
    embeddings: EmbeddingStore,
    C: float = DEFAULT_C,
) -> PreferenceModel:
    """Full retrain from all labeled designs.

    Per modality: kernel width from the labeled vectors, then an RBF SVM;
    the per-modality decision values feed the logistic combiner.
    """
    ids = [d for d, _ in labeled]
    flags = np.array([bool(v) for _, v in labeled])
    if flags.all() or not flags.any():
        raise ColdStartError("need at least one positive and one negative label")
    y = np.where(flags, 1.0, -1.0)

    svms: dict[str, SvmModel] = {}
    columns = []
    for m in embeddings.modalities:
        x = embeddings.vectors(ids, m)
        svms[m] = train_svm(x, y, C=C, sigma2=kernel_width(x))
        columns.append(svms[m].decision_function(x))
    features = np.column_stack(columns)
    combiner = fit_logistic(features, flags.astype(np.float64))
    return PreferenceModel(
        svms=svms,
        modalities=tuple(embeddings.modalities),
        combiner=combiner,
        trained_on=len(labeled),
    )


def predict(model: PreferenceModel, embeddings: dict[str, np.ndarray]) -> float:
    """Like-probability for a single design's embeddings."""
    f = model.decision_values({m: np.atleast_2d(v) for m, v in embeddings.items()})
    z = f @ model.combiner[:-1] + model.combiner[-1]
    return float(_logistic(z)[0])


def predict_ids(model: PreferenceModel, store: EmbeddingStore, ids: list[str]) -> np.ndarray:
    """Vectorized like-probabilities for catalog designs."""
    f = model.decision_values({m: store.vectors(ids, m) for m in model.modalities})
    return _logistic(f @ model.combiner[:-1] + model.combiner[-1])


# ---------------------------------------------------------------------------
# Bootstrap ensemble


@dataclass
class ThompsonEnsemble:
    """k preference models, each trained on a random subsample of feedback.

    Every labeled design joins each member's dataset independently with
    probability p, so the members approximate a posterior over models.
    Members without both classes stay untrained (None) and score at random.
    """

    members: list[PreferenceModel | None]
    member_data: list[dict[str, bool]]
    k: int = THOMPSON_K
    p: float = THOMPSON_P

    @classmethod
    def empty(cls, k: int = THOMPSON_K, p: float = THOMPSON_P) -> "ThompsonEnsemble":
        return cls(members=[None] * k, member_data=[{} for _ in range(k)], k=k, p=p)


def ensemble_update(
    ensemble: ThompsonEnsemble,
    newly_labeled: list[tuple[str, bool]],
    rng: np.random.Generator,
    store: EmbeddingStore,
) -> ThompsonEnsemble:
    """Route new labels to members with probability p each, then retrain
    every member whose dataset holds both classes."""
    include = rng.random((ensemble.k, len(newly_labeled))) < ensemble.p
    data = [dict(d) for d in ensemble.member_data]
    for mi in range(ensemble.k):
        for di, (design_id, flag) in enumerate(newly_labeled):
            if include[mi, di]:
                data[mi][design_id] = bool(flag)
    members: list[PreferenceModel | None] = []
    for mi in range(ensemble.k):
        values = list(data[mi].values())
        if any(values) and not all(values):
            members.append(train_preference(list(data[mi].items()), store))
        else:
            members.append(None)
    return ThompsonEnsemble(members=members, member_data=data, k=ensemble.k, p=ensemble.p)
