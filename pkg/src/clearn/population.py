"""Population-level quantities for the coherence loss.

Closed-form minimizer of the conditional risk, its inverse (the class
probability implied by a score), risk gaps, and exact risks over finite
input distributions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BoundaryError, DimensionMismatchError, InvalidInputError, InvalidParameterError
from .losses import LossParams, _sigmoid, coherence_v, softplus

__all__ = [
    "FiniteDistribution",
    "ExactRisks",
    "f_star",
    "eta_tilde",
    "log_eta_tilde",
    "log_odds_eta_tilde",
    "eta_tilde_sign",
    "cond_risk",
    "risk_gap",
    "exact_risks",
]


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _check_open(eta):
    eta = np.asarray(eta, dtype=float)
    if not np.all(np.isfinite(eta)):
        raise InvalidInputError("eta must be finite")
    if np.any((eta <= 0.0) | (eta >= 1.0)):
        raise BoundaryError("eta must lie strictly inside (0, 1); the minimizer diverges at 0 and 1")
    return eta


def _check_closed(eta):
    eta = np.asarray(eta, dtype=float)
    if not np.all((eta >= 0.0) & (eta <= 1.0)):
        raise InvalidInputError("eta must lie in [0, 1]")
    return eta


def _check_f(f):
    f = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f)):
        raise InvalidInputError("scores must be finite")
    return f


def f_star(p: LossParams, eta):
    """Unique minimizer over ``f`` of ``eta V(f) + (1 - eta) V(-f)``.

    Evaluated for ``eta >= 1/2`` in the factored form

        rho * log(1 + sqrt(1 + e)) - rho * log(2 (1 - eta) / (2 eta - 1)) + u,
        e = 4 eta (1 - eta) exp(-2u/rho) / (2 eta - 1)^2,

    with ``e`` kept in log space, and extended to ``eta < 1/2`` through
    ``f_star(1 - eta) = -f_star(eta)``.
    """
    eta = _check_open(eta)
    rho, u = p.rho, p.u
    hi = np.maximum(eta, 1.0 - eta)
    d = 2.0 * hi - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_e = np.log(4.0 * hi * (1.0 - hi)) - 2.0 * u / rho - 2.0 * np.log(d)
        log_root = 0.5 * np.logaddexp(0.0, log_e)  # log sqrt(1 + e)
        val = rho * np.logaddexp(0.0, log_root) - rho * (np.log(2.0 * (1.0 - hi)) - np.log(d)) + u
    val = np.where(d == 0.0, 0.0, val)
    val = np.where(eta < 0.5, -val, val)
    return _out(val)


def _w1(p: LossParams, f):
    return _sigmoid((p.u - f) / p.rho)


def _w2(p: LossParams, f):
    return _sigmoid((p.u + f) / p.rho)


def log_eta_tilde(p: LossParams, f):
    """``(log eta_tilde(f), log(1 - eta_tilde(f)))`` computed in log space."""
    f = _check_f(f)
    lw1 = -softplus((f - p.u) / p.rho)
    lw2 = -softplus(-(p.u + f) / p.rho)
    norm = np.logaddexp(lw1, lw2)
    return _out(lw2 - norm), _out(lw1 - norm)


def log_odds_eta_tilde(p: LossParams, f):
    """``log(eta_tilde / (1 - eta_tilde))``, positive exactly when ``f > 0``.

    Keeps the sign of ``f`` where ``eta_tilde`` itself rounds to 1/2 (scores
    inside the margin at small ``rho``).  Both softplus terms underflow, and
    the difference becomes 0, once ``(u - |f|) / rho`` exceeds about 745.
    """
    f = _check_f(f)
    return _out(softplus((f - p.u) / p.rho) - softplus(-(p.u + f) / p.rho))


def eta_tilde_sign(p: LossParams, f):
    """Exact ``sign(eta_tilde(f) - 1/2)``.

    The log-odds is ``softplus(a) - softplus(b)`` with ``a - b = 2 f / rho``.
    Where it underflows to 0 the sign still follows from softplus being
    strictly increasing, so it is taken as ``sign(a - b) = sign(f)`` there.
    """
    f = _check_f(f)
    lo = np.asarray(log_odds_eta_tilde(p, f))
    return _out(np.where(lo != 0.0, np.sign(lo), np.sign(f)))


def eta_tilde(p: LossParams, f):
    """Inverse of :func:`f_star`: the class-+1 probability implied by score ``f``.

    Equals ``w2 / (w1 + w2)`` with ``w1 = 1/(1 + exp((f-u)/rho))`` and
    ``w2 = 1/(1 + exp(-(f+u)/rho))``.
    """
    log_p, _ = log_eta_tilde(p, f)
    return _out(np.exp(log_p))


def cond_risk(p: LossParams, eta, f):
    """Conditional surrogate risk ``eta V(f) + (1 - eta) V(-f)``."""
    eta = _check_closed(eta)
    f = _check_f(f)
    return _out(eta * coherence_v(p, f) + (1.0 - eta) * coherence_v(p, -f))


def risk_gap(p: LossParams, eta, f):
    """Excess conditional risk of ``f`` over the minimizer; always ``>= 0``."""
    eta = _check_open(eta)
    f = _check_f(f)
    fs = np.asarray(f_star(p, eta))
    rho, u = p.rho, p.u
    gap = eta * rho * (softplus((u - f) / rho) - softplus((u - fs) / rho)) + (1.0 - eta) * rho * (
        softplus((u + f) / rho) - softplus((u + fs) / rho)
    )
    return _out(np.maximum(gap, 0.0))


@dataclass(frozen=True)
class FiniteDistribution:
    """Input distribution with finitely many atoms, each carrying its own ``eta``."""

    weights: np.ndarray
    etas: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        e = np.asarray(self.etas, dtype=float)
        if w.ndim != 1 or w.shape != e.shape or w.size == 0:
            raise DimensionMismatchError("weights and etas must be equal-length 1-D sequences")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidParameterError("weights must be nonnegative and sum to 1")
        _check_closed(e)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "etas", e)

    @classmethod
    def from_atoms(cls, atoms):
        w, e = zip(*atoms)
        return cls(np.array(w), np.array(e))


class ExactRisks(NamedTuple):
    zero_one_risk: float
    bayes_risk: float
    surrogate_gap: float


def _zero_one(f, eta):
    return np.where(f <= 0, eta, 1.0 - eta)


def exact_risks(p: LossParams, dist: FiniteDistribution, scores) -> ExactRisks:
    """Misclassification risk of ``scores``, Bayes risk, and expected risk gap.

    Atoms with ``eta`` in ``{0, 1}`` contribute ``V(f)`` or ``V(-f)`` to the
    gap, since the conditional risk infimum is zero there.
    """
    f = _check_f(scores)
    if f.shape != dist.etas.shape:
        raise DimensionMismatchError(f"{f.size} scores for {dist.etas.size} atoms")
    w, eta = dist.weights, dist.etas
    zero_one = float(np.sum(w * _zero_one(f, eta)))
    bayes = float(np.sum(w * _zero_one(2.0 * eta - 1.0, eta)))
    gaps = np.empty_like(f)
    inner = (eta > 0) & (eta < 1)
    if np.any(inner):
        gaps[inner] = np.atleast_1d(risk_gap(p, eta[inner], f[inner]))
    gaps[eta == 1.0] = np.atleast_1d(coherence_v(p, f[eta == 1.0]))
    gaps[eta == 0.0] = np.atleast_1d(coherence_v(p, -f[eta == 0.0]))
    return ExactRisks(zero_one, bayes, float(np.sum(w * gaps)))


def w_sum_minus_one(p: LossParams, f) -> float:
    """``w1(f) + w2(f) - 1``: nonnegative, zero exactly when ``u = 0``."""
    f = _check_f(f)
    return _out(_w1(p, f) + _w2(p, f) - 1.0)

