"""Soft-margin RBF-kernel SVM trained by sequential minimal optimization.

The trainer optimizes the standard dual with pairwise updates on the
maximal KKT-violating pair, which is deterministic given the inputs and
needs no error-cache heuristics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

DEFAULT_C = 100.0
KKT_TOL = 1e-3
MAX_PASSES = 10_000


class DegenerateDataError(ValueError):
    """Training data admits no kernel width or no two-class solution."""


def rbf_kernel(a: np.ndarray, b: np.ndarray, sigma2: float) -> np.ndarray:
    """k(x, z) = exp(-||x - z||^2 / (2 sigma^2)) for all row pairs."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    d2 = (
        (a * a).sum(axis=1)[:, None]
        + (b * b).sum(axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.exp(-np.maximum(d2, 0.0) / (2.0 * sigma2))


def kernel_width(vectors: np.ndarray) -> float:
    """Half the nearest-rank 10th percentile of pairwise Euclidean distances.

    Falls back to half the smallest nonzero distance when duplicates drive
    the percentile to zero; identical inputs are an error.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or len(x) < 2:
        raise DegenerateDataError("kernel width needs at least 2 vectors")
    d = np.sort(pdist(x))
    rank = max(1, int(np.ceil(0.1 * len(d))))  # nearest-rank, 1-based
    p10 = d[rank - 1]
    if p10 <= 0.0:
        nonzero = d[d > 0.0]
        if len(nonzero) == 0:
            raise DegenerateDataError("all vectors identical; kernel width undefined")
        p10 = nonzero[0]
    return 0.5 * float(p10)


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # (m, d)
    dual_coefs: np.ndarray  # (m,) alpha_i * y_i
    bias: float
    sigma2: float
    C: float

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        k = rbf_kernel(np.atleast_2d(x), self.support_vectors, self.sigma2)
        return k @ self.dual_coefs + self.bias

    def to_dict(self) -> dict:
        return {
            "support_vectors": self.support_vectors.tolist(),
            "dual_coefs": self.dual_coefs.tolist(),
            "bias": self.bias,
            "sigma2": self.sigma2,
            "C": self.C,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SvmModel":
        return cls(
            support_vectors=np.asarray(data["support_vectors"], dtype=np.float64),
            dual_coefs=np.asarray(data["dual_coefs"], dtype=np.float64),
            bias=float(data["bias"]),
            sigma2=float(data["sigma2"]),
            C=float(data["C"]),
        )


def train_svm(
    x: np.ndarray,
    y: np.ndarray,
    C: float = DEFAULT_C,
    sigma2: float | None = None,
    tol: float = KKT_TOL,
    max_passes: int = MAX_PASSES,
) -> SvmModel:
    """Fit the soft-margin dual; y holds +-1 labels and both classes must
    be present (cold starts are the caller's concern)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise DegenerateDataError("training labels must include both +1 and -1")
    if sigma2 is None:
        sigma2 = kernel_width(x)
    k = rbf_kernel(x, x, sigma2)
    alphas, bias = _smo(k, y, C, tol, max_passes)

    keep = alphas > 1e-10
    return SvmModel(
        support_vectors=x[keep].copy(),
        dual_coefs=(alphas * y)[keep],
        bias=bias,
        sigma2=float(sigma2),
        C=float(C),
    )


def _smo(
    k: np.ndarray, y: np.ndarray, C: float, tol: float, max_passes: int
) -> tuple[np.ndarray, float]:
    """Pairwise dual ascent on the maximal violating pair.

    F_i = y_i - sum_j alpha_j y_j K_ij; optimality holds when
    max F over the up-set minus min F over the down-set is within tol.
    """
    n = len(y)
    alphas = np.zeros(n)
    u = np.zeros(n)  # decision values without bias
    pos = y > 0

    for _ in range(max_passes):
        f = y - u
        up = (pos & (alphas < C)) | (~pos & (alphas > 0))
        dn = (~pos & (alphas < C)) | (pos & (alphas > 0))
        f_up = np.where(up, f, -np.inf)
        f_dn = np.where(dn, f, np.inf)
        i = int(f_up.argmax())
        j = int(f_dn.argmin())
        gap = f_up[i] - f_dn[j]
        if gap <= tol:
            break

        # alpha_i moves by +y_i*lam, alpha_j by -y_j*lam; both bounds positive.
        hi_i = C - alphas[i] if pos[i] else alphas[i]
        hi_j = alphas[j] if pos[j] else C - alphas[j]
        lam_max = min(hi_i, hi_j)
        eta = k[i, i] + k[j, j] - 2.0 * k[i, j]
        if eta > 1e-15:
            lam = min(gap / eta, lam_max)
        else:
            lam = lam_max  # linear in this direction; go to the boundary
        if lam <= 0.0:
            break
        alphas[i] += y[i] * lam
        alphas[j] -= y[j] * lam
        u += lam * (k[i] - k[j])

    f = y - u
    up = (pos & (alphas < C)) | (~pos & (alphas > 0))
    dn = (~pos & (alphas < C)) | (pos & (alphas > 0))
    m_up = np.where(up, f, -np.inf).max()
    m_dn = np.where(dn, f, np.inf).min()
    free = (alphas > 1e-10) & (alphas < C - 1e-10)
    if free.any():
        bias = float(f[free].mean())
    else:
        bias = float((m_up + m_dn) / 2.0)
    return alphas, bias


def dual_objective(alphas: np.ndarray, k: np.ndarray, y: np.ndarray) -> float:
    """W(alpha) = sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij."""
    ay = alphas * y
    return float(alphas.sum() - 0.5 * ay @ k @ ay)
