"""Class-probability estimates for SVM decision values.

The main estimator maps a score through the inverse population minimizer
of the coherence loss (``u = 1``) with a temperature fitted by minimizing
the empirical cross-entropy on training scores.  Platt's sigmoid and
Sollich's piecewise formula are provided as baselines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, DimensionMismatchError
from .losses import LossParams, softplus
from .population import eta_tilde, log_eta_tilde

__all__ = [
    "CalibrationFit",
    "PlattFit",
    "svm_prob",
    "ekl",
    "fit_rho",
    "sollich_prob",
    "platt_fit",
    "platt_prob",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CalibrationFit:
    rho_hat: float
    ekl_value: float
    iterations: int


@dataclass(frozen=True)
class PlattFit:
    A: float
    B: float
    iterations: int = 0
    capped: bool = False


def svm_prob(rho: float, fhat):
    """Probability of class +1 for decision value ``fhat`` at temperature ``rho``."""
    return eta_tilde(LossParams(rho=rho, u=1.0), fhat)


def _scores_labels(scores, labels):
    f = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels, dtype=float).ravel()
    if f.shape != y.shape or f.size == 0:
        raise DimensionMismatchError("scores and labels must be aligned and nonempty")
    return f, y


def ekl(rho: float, scores, labels) -> float:
    """Empirical cross-entropy of :func:`svm_prob` against +1/-1 labels."""
    f, y = _scores_labels(scores, labels)
    log_p, log_q = log_eta_tilde(LossParams(rho=rho, u=1.0), f)
    return float(-np.mean(np.where(y > 0, log_p, log_q)))


def _golden(fn, lo, hi, tol=1e-10, max_iter=200):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    it = 0
    while b - a > tol and it < max_iter:
        it += 1
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    x = c if fc <= fd else d
    return x, it


def fit_rho(scores, labels, bracket=(1e-3, 1e2), grid_size=100, tol=1e-10, max_newton=50) -> CalibrationFit:
    """Fit the temperature by minimizing :func:`ekl` over ``bracket``.

    Works in ``log rho``.  A log-spaced grid locates the best cell; inside
    it, Newton steps with finite-difference derivatives are taken while
    they stay in the cell and decrease the objective, otherwise the cell
    is finished by golden-section search.
    """
    f, y = _scores_labels(scores, labels)
    if np.all(y == y[0]):
        raise CalibrationError("calibration needs both labels")
    lo, hi = math.log(bracket[0]), math.log(bracket[1])
    obj = lambda t: ekl(math.exp(t), f, y)  # noqa: E731

    grid = np.linspace(lo, hi, grid_size)
    vals = np.array([obj(t) for t in grid])
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid_size - 1)]
    best_t, best_v = float(grid[k]), float(vals[k])

    t, v = best_t, best_v
    h = 1e-4
    iterations = 0
    newton_ok = True
    for _ in range(max_newton):
        iterations += 1
        vp, vm = obj(t + h), obj(t - h)
        g = (vp - vm) / (2 * h)
        c = (vp - 2 * v + vm) / h**2
        if c <= 0 or not math.isfinite(c):
            newton_ok = False
            break
        t_new = t - g / c
        if not a <= t_new <= b:
            newton_ok = False
            break
        v_new = obj(t_new)
        if v_new > v:
            newton_ok = False
            break
        done = abs(t_new - t) < tol
        t, v = t_new, v_new
        if done:
            break
    if not newton_ok:
        tg, it = _golden(obj, a, b, tol=tol)
        iterations += it
        vg = obj(tg)
        if vg < v:
            t, v = tg, vg
    if best_v < v:
        t, v = best_t, best_v
    return CalibrationFit(rho_hat=math.exp(t), ekl_value=v, iterations=iterations)


def sollich_prob(fhat):
    """Piecewise-logistic probability: slope 2 inside the margin, shifted outside."""
    f = np.asarray(fhat, dtype=float)
    arg = np.where(np.abs(f) <= 1.0, 2.0 * f, f + np.sign(f))
    p = np.exp(-softplus(-arg))
    return float(p) if p.ndim == 0 else p


def platt_prob(fit: PlattFit, fhat):
    """``1 / (1 + exp(A f + B))``."""
    u = fit.A * np.asarray(fhat, dtype=float) + fit.B
    p = np.exp(-softplus(u))
    return float(p) if p.ndim == 0 else p


def _platt_loss(A, B, f, t):
    u = A * f + B
    return float(np.sum(t * softplus(u) + (1.0 - t) * softplus(-u)))


def platt_fit(scores, labels, max_iter=100, tol=1e-10, a_cap=1e3) -> PlattFit:
    """Fit Platt's sigmoid by Newton's method with backtracking.

    Targets are the raw 0/1 labels (no prior smoothing).  When the scores
    separate the labels the minimizer does not exist (``|A|`` grows without
    bound); ``A`` is then set to ``a_cap`` in magnitude with the sigmoid
    centred between the two classes, and ``capped`` is set.
    """
    f, y = _scores_labels(scores, labels)
    n_pos = int(np.sum(y > 0))
    n_neg = f.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise CalibrationError("Platt scaling needs both labels")
    t = (y > 0).astype(float)
    A, B = 0.0, math.log(n_neg / n_pos)
    loss = _platt_loss(A, B, f, t)
    capped = False
    it = 0
    for it in range(1, max_iter + 1):
        u = A * f + B
        s = np.exp(-softplus(-u))  # sigmoid(u)
        g_u = s - (1.0 - t)
        h_u = s * (1.0 - s)
        gA, gB = float(g_u @ f), float(g_u.sum())
        if math.hypot(gA, gB) < tol * f.size:
            break
        hAA = float(h_u @ (f * f)) + 1e-12
        hAB = float(h_u @ f)
        hBB = float(h_u.sum()) + 1e-12
        det = hAA * hBB - hAB * hAB
        dA = -(hBB * gA - hAB * gB) / det
        dB = -(-hAB * gA + hAA * gB) / det
        step = 1.0
        while step > 1e-10:
            A_new, B_new = A + step * dA, B + step * dB
            new_loss = _platt_loss(A_new, B_new, f, t)
            if new_loss <= loss + 1e-4 * step * (gA * dA + gB * dB):
                break
            step *= 0.5
        else:
            break
        A, B, loss = A_new, B_new, new_loss
        if abs(A) > a_cap:
            A = math.copysign(a_cap, A)
            capped = True
            break
    pos, neg = f[y > 0], f[y <= 0]
    for lo, hi, sign in ((neg, pos, -1.0), (pos, neg, 1.0)):
        if lo.max() < hi.min():
            A = sign * a_cap
            B = -A * 0.5 * (lo.max() + hi.min())
            capped = True
    return PlattFit(A=float(A), B=float(B), iterations=it, capped=capped)
