"""Elastic-net regularized C-learning by pathwise coordinate descent.

Two model forms are fitted:

* kernel expansion ``f(x) = alpha + sum_j beta_j K(x, x_j)`` with penalty
  ``gamma * ((1 - omega)/2 * beta' K beta + omega * ||beta||_1)``;
* linear expansion ``f(x) = a + x . b`` with the elastic net
  ``gamma * ((1 - omega)/2 * ||b||^2 + omega * ||b||_1)``.

The outer loop re-forms a Newton quadratic approximation of the coherence
loss ``V_{rho,1}`` around the current fit; the inner loop minimizes that
quadratic plus the penalty by cyclic coordinate descent.  The C-loss
objective differs from the V-loss objective only by the constant factor
``kappa = rho * log(1 + exp(1/rho))``, so ``loss_scale="c_loss"`` runs the
same iteration with penalty ``gamma * kappa``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import (
    DegenerateWeightsError,
    DimensionMismatchError,
    InvalidInputError,
    InvalidParameterError,
    SingleClassError,
)
from .kernels import KernelSpec, gram
from .losses import softplus

__all__ = [
    "TrainConfig",
    "FitInfo",
    "KernelModel",
    "LinearModel",
    "NewtonState",
    "soft_threshold",
    "newton_state",
    "update_alpha",
    "update_beta_j",
    "update_b_j",
    "fit_kernel",
    "fit_linear",
    "fit_svm_smoothed",
    "fit_svm_libsvm",
    "predict_score",
    "objective",
    "hinge_objective",
    "loss_scale_factor",
]

Q_CLAMP = 1e-12
MAX_HALVINGS = 20
SVM_RHO_SCHEDULE = (1.0, 0.3, 0.1, 0.03, 0.01)


def loss_scale_factor(rho: float) -> float:
    """``kappa`` with ``C_{rho,1} = V_{rho,1} / kappa``."""
    return rho * float(softplus(1.0 / rho))


@dataclass(frozen=True)
class TrainConfig:
    gamma: float = 1.0
    omega: float = 0.5
    rho: float = 1.0
    eps_outer: float = 1e-5
    eps_inner: float = 1e-5
    max_outer: int = 100
    max_inner: int = 10000
    loss_scale: str = "c_loss"

    def __post_init__(self):
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise InvalidParameterError(f"gamma must be nonnegative, got {self.gamma!r}")
        if not 0.0 <= self.omega <= 1.0:
            raise InvalidParameterError(f"omega must be in [0, 1], got {self.omega!r}")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise InvalidParameterError(f"rho must be positive, got {self.rho!r}")
        if self.eps_outer <= 0 or self.eps_inner <= 0:
            raise InvalidParameterError("tolerances must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise InvalidParameterError("iteration caps must be positive")
        if self.loss_scale not in ("c_loss", "v_loss"):
            raise InvalidParameterError(f"loss_scale must be 'c_loss' or 'v_loss', got {self.loss_scale!r}")

    @property
    def effective_gamma(self) -> float:
        """Penalty weight against the V-loss data term."""
        if self.loss_scale == "c_loss":
            return self.gamma * loss_scale_factor(self.rho)
        return self.gamma

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class FitInfo:
    converged: bool
    n_outer: int
    n_inner: int
    objective_path: list = field(default_factory=list)
    backend: str = ""


@dataclass
class KernelModel:
    alpha: float
    beta: np.ndarray
    spec: KernelSpec
    support_inputs: np.ndarray
    config: TrainConfig | None = None
    info: FitInfo | None = None

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float)
        self.support_inputs = np.atleast_2d(np.asarray(self.support_inputs, dtype=float))
        if self.beta.shape != (self.support_inputs.shape[0],):
            raise DimensionMismatchError("beta length must equal the number of support inputs")

    def decision_function(self, X, K=None):
        if K is None:
            K = gram(self.spec, X, self.support_inputs)
        return self.alpha + K @ self.beta


@dataclass
class LinearModel:
    a: float
    b: np.ndarray
    config: TrainConfig | None = None
    info: FitInfo | None = None

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)

    def decision_function(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.b.size:
            raise DimensionMismatchError(f"model has {self.b.size} features, input has {X.shape[1]}")
        return self.a + X @ self.b


def predict_score(model, X):
    """Decision values ``f(x)`` for the rows of ``X``."""
    return model.decision_function(X)


class NewtonState(NamedTuple):
    """Quadratic approximation of the V-loss data term at the current fit.

    ``q`` is clamped to ``[1e-12, 1 - 1e-12]``.  ``resid`` holds
    ``z - f_hat`` computed directly, which stays accurate when ``1 - q`` is
    tiny.
    """

    q: np.ndarray
    z: np.ndarray
    weights: np.ndarray
    resid: np.ndarray
    rho: float


def soft_threshold(mu, nu):
    """``sign(mu) * max(|mu| - nu, 0)``."""
    if np.any(np.asarray(nu) < 0):
        raise InvalidParameterError("threshold must be nonnegative")
    mu = np.asarray(mu, dtype=float)
    val = np.sign(mu) * np.maximum(np.abs(mu) - nu, 0.0)
    return float(val) if val.ndim == 0 else val


def newton_state(scores, y, rho: float) -> NewtonState:
    f = np.asarray(scores, dtype=float)
    y = np.asarray(y, dtype=float)
    t = (1.0 - y * f) / rho
    e = np.exp(-np.abs(t))
    q = np.where(t >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    one_minus_q = np.where(t >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
    q = np.clip(q, Q_CLAMP, 1.0 - Q_CLAMP)
    one_minus_q = np.clip(one_minus_q, Q_CLAMP, 1.0 - Q_CLAMP)
    resid = rho * y / one_minus_q
    w = q * one_minus_q / (f.size * rho)
    return NewtonState(q=q, z=f + resid, weights=w, resid=resid, rho=rho)


def update_alpha(state: NewtonState, beta_effect) -> float:
    """Offset minimizing the quadratic for fixed coefficients.

    ``beta_effect`` is the vector ``k_i' beta`` (or ``x_i' b``).
    """
    w = state.q * (1.0 - state.q)
    total = float(np.sum(w))
    if total <= 0.0:
        raise DegenerateWeightsError("all Newton weights are zero")
    return float(np.sum(w * (state.z - np.asarray(beta_effect, dtype=float))) / total)


def _coordinate(num, den, g1):
    return soft_threshold(num, g1) / den if den > 0 else 0.0


def update_beta_j(j: int, state: NewtonState, alpha_tilde: float, beta_check, K, cfg: TrainConfig) -> float:
    """Closed-form coordinate minimizer for ``beta_j`` (``beta_check[j]`` must be 0)."""
    beta_check = np.asarray(beta_check, dtype=float)
    if beta_check[j] != 0.0:
        raise InvalidParameterError("beta_check must have coordinate j set to zero")
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    w = state.q * (1.0 - state.q)
    g = cfg.effective_gamma
    kj = K[:, j]
    Kb = K @ beta_check
    t = float(np.sum(kj * w * (state.z - alpha_tilde - Kb))) / (n * state.rho)
    num = t - g * (1.0 - cfg.omega) * Kb[j]
    den = float(np.sum(kj**2 * w)) / (n * state.rho) + g * (1.0 - cfg.omega) * K[j, j]
    return _coordinate(num, den, g * cfg.omega)


def update_b_j(j: int, state: NewtonState, a_tilde: float, b_check, X, cfg: TrainConfig) -> float:
    """Linear-expansion analogue of :func:`update_beta_j` (ridge term ``b_j^2 / 2``)."""
    b_check = np.asarray(b_check, dtype=float)
    if b_check[j] != 0.0:
        raise InvalidParameterError("b_check must have coordinate j set to zero")
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    w = state.q * (1.0 - state.q)
    g = cfg.effective_gamma
    xj = X[:, j]
    t = float(np.sum(xj * w * (state.z - a_tilde - X @ b_check))) / (n * state.rho)
    den = float(np.sum(xj**2 * w)) / (n * state.rho) + g * (1.0 - cfg.omega)
    return _coordinate(t, den, g * cfg.omega)


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
        raise DimensionMismatchError("X must be n x d and y length n")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("X contains non-finite values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise InvalidInputError("labels must be +1 or -1")
    if y.size < 2 or np.all(y == y[0]):
        raise SingleClassError("training data must contain both classes")
    return X, y


def _v_objective(fvals, y, rho, g, omega, beta, pen_vec):
    # (1/n) sum V_{rho,1}(y f) + g * ((1-omega)/2 beta.pen_vec + omega |beta|_1)
    loss = rho * float(np.mean(softplus((1.0 - y * fvals) / rho)))
    pen = 0.5 * (1.0 - omega) * float(beta @ pen_vec) + omega * float(np.abs(beta).sum())
    return loss + g * pen


def _fit(D, kernel, y, cfg: TrainConfig, init):
    n, m = D.shape
    Dt = np.ascontiguousarray(D.T)
    rho, omega = cfg.rho, cfg.omega
    g = cfg.effective_gamma
    g1, g2 = g * omega, g * (1.0 - omega)
    scale = 1.0 / (n * rho)

    if init is None:
        alpha, beta = 0.0, np.zeros(m)
    else:
        alpha = float(init[0])
        beta = np.array(init[1], dtype=float)
        if beta.shape != (m,):
            raise DimensionMismatchError(f"initial coefficients must have length {m}")

    def evaluate(a, b):
        Db = D @ b
        return _v_objective(a + Db, y, rho, g, omega, b, Db if kernel else b), Db

    def step(w, res):
        # minimize the quadratic model by coordinate descent, then back off until the objective drops
        b_new = beta.copy()
        Db_new = Dbeta.copy()
        a_new, sweeps, _ = _backend.cd_inner(
            Dt, w, res, b_new, Db_new, alpha, g1, g2, scale, kernel, cfg.eps_inner, cfg.max_inner
        )
        da, db = a_new - alpha, b_new - beta
        t = 1.0
        F_new, Db_new = evaluate(a_new, b_new)
        halvings = 0
        while F_new > F + slack and halvings < MAX_HALVINGS:
            t *= 0.5
            halvings += 1
            a_new, b_new = alpha + t * da, beta + t * db
            F_new, Db_new = evaluate(a_new, b_new)
        return a_new, b_new, Db_new, F_new, sweeps

    F, Dbeta = evaluate(alpha, beta)
    path = [F]
    converged = False
    n_inner = 0
    n_outer = 0
    for n_outer in range(1, cfg.max_outer + 1):
        slack = 1e-12 * max(1.0, abs(F))
        st = newton_state(alpha + Dbeta, y, rho)
        a_new, b_new, Db_new, F_new, sweeps = step(st.q * (1.0 - st.q), st.resid.copy())
        n_inner += sweeps
        if F_new > F + slack:
            # Newton curvature far too small (flat part of the loss at small rho): fall back to the
            # majorizing quadratic with the curvature bound 1/(4 rho), which always descends
            a_new, b_new, Db_new, F_new, sweeps = step(np.full(y.size, 0.25), 4.0 * rho * y * st.q)
            n_inner += sweeps
        if F_new > F + slack:
            # no descent from either model: the current iterate is optimal to precision
            converged = True
            break
        change = math.sqrt((a_new - alpha) ** 2 + float((b_new - beta) @ (b_new - beta)))
        alpha, beta, Dbeta, F = a_new, b_new, Db_new, F_new
        path.append(F)
        if change < cfg.eps_outer:
            converged = True
            break

    if cfg.loss_scale == "c_loss":
        kappa = loss_scale_factor(rho)
        path = [v / kappa for v in path]
    info = FitInfo(
        converged=converged, n_outer=n_outer, n_inner=n_inner, objective_path=path, backend=_backend.BACKEND
    )
    return float(alpha), beta, info


def fit_kernel(X, y, spec: KernelSpec, cfg: TrainConfig, *, K=None, init=None) -> KernelModel:
    """Fit the kernel-expansion C-learning model.

    Parameters
    ----------
    X : array, shape (n, d)
    y : array of +1/-1, shape (n,)
    spec : KernelSpec
    cfg : TrainConfig
    K : array, shape (n, n), optional
        Precomputed training Gram matrix.
    init : (alpha, beta), optional
        Warm start; defaults to all zeros.

    Returns
    -------
    KernelModel
        ``info.converged`` is False when ``max_outer`` was exhausted; the
        returned iterate is then the last (and lowest-objective) one.
    """
    X, y = _check_xy(X, y)
    if K is None:
        K = gram(spec, X)
    elif K.shape != (X.shape[0], X.shape[0]):
        raise DimensionMismatchError("precomputed Gram matrix has the wrong shape")
    alpha, beta, info = _fit(np.asarray(K, dtype=float), True, y, cfg, init)
    return KernelModel(alpha=alpha, beta=beta, spec=spec, support_inputs=X, config=cfg, info=info)


def fit_linear(X, y, cfg: TrainConfig, *, init=None) -> LinearModel:
    """Fit the linear-expansion C-learning model with the elastic-net penalty."""
    X, y = _check_xy(X, y)
    a, b, info = _fit(X, False, y, cfg, init)
    return LinearModel(a=a, b=b, config=cfg, info=info)


def fit_svm_smoothed(
    X, y, spec: KernelSpec, gamma: float, *, K=None, rhos=SVM_RHO_SCHEDULE, eps=1e-6, max_outer=200
) -> KernelModel:
    """Approximate the hinge-loss kernel SVM by a V-loss fit at small ``rho``.

    Runs :func:`fit_kernel` with ``omega = 0`` along the decreasing
    temperature schedule ``rhos``, warm-starting each stage.  At the final
    temperature the hinge objective of the result is within
    ``rhos[-1] * log 2`` of the SVM optimum.
    """
    X, y = _check_xy(X, y)
    if K is None:
        K = gram(spec, X)
    init = None
    model = None
    n_outer = n_inner = 0
    path = []
    for rho in rhos:
        cfg = TrainConfig(
            gamma=gamma, omega=0.0, rho=rho, eps_outer=eps, eps_inner=eps, max_outer=max_outer,
            loss_scale="v_loss",
        )
        model = fit_kernel(X, y, spec, cfg, K=K, init=init)
        init = (model.alpha, model.beta)
        n_outer += model.info.n_outer
        n_inner += model.info.n_inner
        path.extend(model.info.objective_path)
    model.info = replace(model.info, n_outer=n_outer, n_inner=n_inner, objective_path=path)
    return model


def fit_svm_libsvm(X, y, spec: KernelSpec, gamma: float, *, K=None, tol=1e-6) -> KernelModel:
    """Exact hinge-loss kernel SVM through libsvm (scikit-learn ``SVC``).

    Minimizes ``mean([1 - y f]_+) + gamma/2 beta' K beta`` by solving the
    equivalent problem with ``C = 1 / (n gamma)`` on the precomputed Gram
    matrix, then scatters the dual coefficients into ``beta``.
    """
    from sklearn.svm import SVC

    X, y = _check_xy(X, y)
    if not gamma > 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma!r}")
    if K is None:
        K = gram(spec, X)
    n = X.shape[0]
    clf = SVC(C=1.0 / (n * gamma), kernel="precomputed", tol=tol)
    clf.fit(K, y)
    beta = np.zeros(n)
    # dual_coef_ is y_i * alpha_i for the support vectors; class order is (-1, +1)
    beta[clf.support_] = clf.dual_coef_[0]
    alpha = float(clf.intercept_[0])
    info = FitInfo(converged=True, n_outer=1, n_inner=int(np.sum(clf.n_iter_)), backend="libsvm")
    return KernelModel(alpha=alpha, beta=beta, spec=spec, support_inputs=X, info=info)


def objective(model, X, y, cfg: TrainConfig, *, K=None) -> float:
    """Regularized training objective of ``model`` in ``cfg.loss_scale`` units."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    rho, omega = cfg.rho, cfg.omega
    if isinstance(model, KernelModel):
        if K is None:
            K = gram(model.spec, X, model.support_inputs)
        if K.shape[0] != K.shape[1]:
            raise DimensionMismatchError("objective needs the square training Gram matrix")
        Kb = K @ model.beta
        f = model.alpha + Kb
        quad = float(model.beta @ Kb)
        l1 = float(np.abs(model.beta).sum())
    else:
        f = model.decision_function(X)
        quad = float(model.b @ model.b)
        l1 = float(np.abs(model.b).sum())
    t = softplus((1.0 - y * f) / rho)
    if cfg.loss_scale == "c_loss":
        loss = float(np.mean(t)) / float(softplus(1.0 / rho))
    else:
        loss = rho * float(np.mean(t))
    return loss + cfg.gamma * (0.5 * (1.0 - omega) * quad + omega * l1)


def hinge_objective(model: KernelModel, y, gamma: float, *, K=None) -> float:
    """``mean([1 - y f]_+) + gamma/2 beta' K beta`` on the training inputs."""
    if K is None:
        K = gram(model.spec, model.support_inputs)
    Kb = K @ model.beta
    f = model.alpha + Kb
    return float(np.mean(np.maximum(1.0 - np.asarray(y) * f, 0.0))) + 0.5 * gamma * float(model.beta @ Kb)
