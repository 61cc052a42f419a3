"""Kernel specifications, Gram matrices and bandwidth heuristics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import DimensionMismatchError, InvalidParameterError, SingleClassError

__all__ = [
    "KernelSpec",
    "gram",
    "sigma_median_between_classes",
    "sigma_mean_pairwise",
]


@dataclass(frozen=True)
class KernelSpec:
    """``kind="rbf"`` evaluates ``exp(-||a - b||^2 / sigma^2)``; ``"linear"`` is ``a . b``."""

    kind: str = "rbf"
    sigma: float | None = 1.0

    def __post_init__(self):
        if self.kind not in ("rbf", "linear"):
            raise InvalidParameterError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf":
            if self.sigma is None or not np.isfinite(self.sigma) or self.sigma <= 0:
                raise InvalidParameterError("rbf kernel needs a positive finite sigma")
        else:
            object.__setattr__(self, "sigma", None)

    def to_dict(self):
        return {"kind": self.kind, "sigma": self.sigma}

    @classmethod
    def from_dict(cls, d):
        return cls(kind=d["kind"], sigma=d.get("sigma"))


def _points(A):
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2 or A.shape[0] == 0:
        raise DimensionMismatchError("point sets must be nonempty 2-D arrays")
    return A


def gram(spec: KernelSpec, A, B=None) -> np.ndarray:
    """Kernel matrix with entries ``K(a_i, b_j)``; ``B`` defaults to ``A``."""
    A = _points(A)
    B = A if B is None else _points(B)
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatchError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if spec.kind == "linear":
        return A @ B.T
    d2 = cdist(A, B, "sqeuclidean")
    K = np.exp(-d2 / spec.sigma**2)
    if B is A:
        # exact symmetry and unit diagonal
        K = 0.5 * (K + K.T)
        np.fill_diagonal(K, 1.0)
    return K


def sigma_median_between_classes(X, y) -> float:
    """Median distance over all pairs with one point from each class."""
    X = _points(X)
    y = np.asarray(y)
    pos, neg = X[y == 1], X[y == -1]
    if len(pos) == 0 or len(neg) == 0:
        raise SingleClassError("both classes are needed for the between-class median")
    sigma = float(np.median(cdist(pos, neg)))
    if sigma <= 0:
        raise InvalidParameterError("between-class median distance is zero")
    return sigma


def sigma_mean_pairwise(X) -> float:
    """Mean Euclidean distance over all unordered pairs of points."""
    X = _points(X)
    if X.shape[0] < 2:
        raise InvalidParameterError("need at least two points")
    sigma = float(np.mean(pdist(X)))
    if sigma <= 0:
        raise InvalidParameterError("all points coincide; bandwidth would be zero")
    return sigma
