"""K-fold cross-validation over (gamma, omega) grids.

The selection criterion is the mean validation classification error; ties
go to the larger ``gamma`` and then to the larger ``omega`` (the sparser,
more regularized fit).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidParameterError, SingleClassError
from .metrics import cer
from .kernels import KernelSpec, gram
from .solver import TrainConfig, fit_kernel, fit_linear, fit_svm_libsvm, fit_svm_smoothed

__all__ = ["CVResult", "stratified_folds", "grid_search_cv", "cv_c_learning", "cv_svm"]

_FOLD_TAG = 0xC5F0


@dataclass(frozen=True)
class CVResult:
    best: dict
    grid: list
    mean_cer: list


def stratified_folds(y, k: int, seed: int):
    """Assign each sample a fold in ``0..k-1``, dealing each class round-robin.

    Every training side then holds both classes whenever each class has at
    least two members.
    """
    y = np.asarray(y)
    if k < 2 or k > y.size:
        raise InvalidParameterError(f"need 2 <= folds <= n, got folds={k}, n={y.size}")
    rng = np.random.default_rng([seed, _FOLD_TAG])
    fold = np.empty(y.size, dtype=int)
    offset = 0
    for label in (-1, 1):
        idx = np.flatnonzero(y == label)
        idx = idx[rng.permutation(idx.size)]
        fold[idx] = (np.arange(idx.size) + offset) % k
        offset += idx.size
    return fold


def grid_search_cv(fit_predict: Callable, grid: Sequence[dict], y, k: int, seed: int) -> CVResult:
    """Pick the grid point with the lowest mean validation CER.

    ``fit_predict(params, train_idx, val_idx)`` returns decision values for
    ``val_idx``.  A fold whose training side has a single class scores as
    all-wrong for every grid point.
    """
    if not grid:
        raise InvalidParameterError("empty parameter grid")
    y = np.asarray(y, dtype=float)
    fold = stratified_folds(y, k, seed)
    errs = []
    for params in grid:
        total = 0.0
        for f in range(k):
            tr, va = np.flatnonzero(fold != f), np.flatnonzero(fold == f)
            try:
                scores = fit_predict(params, tr, va)
                total += cer(scores, y[va])
            except SingleClassError:
                total += 1.0
        errs.append(total / k)
    errs_arr = np.array(errs)
    tied = [i for i in range(len(grid)) if errs_arr[i] == errs_arr.min()]
    best = max(tied, key=lambda i: (grid[i].get("gamma", 0.0), grid[i].get("omega", 0.0)))
    return CVResult(best=dict(grid[best]), grid=[dict(g) for g in grid], mean_cer=errs)


def cv_c_learning(X, y, gammas, omegas, *, spec: KernelSpec | None = None, rho=1.0,
                  loss_scale="c_loss", k=5, seed=0, K=None) -> CVResult:
    """Cross-validate C-learning; kernel expansion when ``spec`` is given, else linear."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    grid = [{"gamma": float(g), "omega": float(o)} for g in gammas for o in omegas]
    if spec is not None and K is None:
        K = gram(spec, X)

    def fit_predict(params, tr, va):
        cfg = TrainConfig(gamma=params["gamma"], omega=params["omega"], rho=rho, loss_scale=loss_scale)
        if spec is None:
            return fit_linear(X[tr], y[tr], cfg).decision_function(X[va])
        m = fit_kernel(X[tr], y[tr], spec, cfg, K=K[np.ix_(tr, tr)])
        return m.decision_function(X[va], K=K[np.ix_(va, tr)])

    return grid_search_cv(fit_predict, grid, y, k, seed)


def cv_svm(X, y, gammas, *, spec: KernelSpec, solver="libsvm", k=5, seed=0, K=None) -> CVResult:
    """Cross-validate the hinge-loss kernel SVM over ``gammas``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if K is None:
        K = gram(spec, X)
    fit = _svm_solver(solver)

    def fit_predict(params, tr, va):
        m = fit(X[tr], y[tr], spec, params["gamma"], K=K[np.ix_(tr, tr)])
        return m.decision_function(X[va], K=K[np.ix_(va, tr)])

    return grid_search_cv(fit_predict, [{"gamma": float(g)} for g in gammas], y, k, seed)


def _svm_solver(name):
    if name == "libsvm":
        return fit_svm_libsvm
    if name == "smoothed":
        return fit_svm_smoothed
    raise InvalidParameterError(f"unknown SVM solver {name!r}; expected 'libsvm' or 'smoothed'")
