"""Classification error rate and the generalized KL metric."""
from __future__ import annotations

import numpy as np
from scipy.special import xlogy

from .errors import DimensionMismatchError, InvalidInputError, InvalidParameterError, MetricDomainError

__all__ = ["cer", "gkl", "gkl_from_log"]

_FORMS = ("divergence", "cross_entropy")


def _aligned(a, b, what):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0:
        raise InvalidInputError(f"{what}: empty input")
    if a.shape != b.shape:
        raise DimensionMismatchError(f"{what}: lengths {a.size} and {b.size} differ")
    return a, b


def cer(values, labels, mode: str = "score") -> float:
    """Fraction of misclassified samples.

    ``mode="score"`` predicts ``sign(f)``; ``mode="probability"`` predicts
    +1 when the probability exceeds 1/2.  A score of exactly 0 (probability
    exactly 1/2) always counts as an error.
    """
    v, y = _aligned(values, labels, "cer")
    if mode == "score":
        wrong = (v * y) <= 0
    elif mode == "probability":
        wrong = (v == 0.5) | ((v > 0.5) != (y > 0))
    else:
        raise InvalidParameterError(f"mode must be 'score' or 'probability', got {mode!r}")
    return float(np.mean(wrong))


def _check_form(form):
    if form not in _FORMS:
        raise InvalidParameterError(f"form must be one of {_FORMS}, got {form!r}")


def gkl(true_eta, est_eta, form: str = "divergence") -> float:
    """Mean generalized KL between true and estimated class probabilities.

    ``form="divergence"`` averages ``eta log(eta/est) + (1-eta) log((1-eta)/(1-est))``;
    ``form="cross_entropy"`` drops the entropy of ``eta`` and averages
    ``-eta log est - (1-eta) log(1-est)``.  ``0 log 0`` is taken as 0.
    """
    eta, est = _aligned(true_eta, est_eta, "gkl")
    _check_form(form)
    if np.any((eta < 0) | (eta > 1)):
        raise MetricDomainError("true probabilities must lie in [0, 1]")
    if np.any((est <= 0) | (est >= 1)):
        raise MetricDomainError("estimated probabilities must lie strictly inside (0, 1)")
    return gkl_from_log(eta, np.log(est), np.log1p(-est), form)


def gkl_from_log(true_eta, log_est, log1m_est, form: str = "divergence") -> float:
    """:func:`gkl` from ``log est`` and ``log(1 - est)`` supplied separately.

    Avoids the rounding of ``est`` to 0 or 1 for extreme scores.
    """
    eta, lp = _aligned(true_eta, log_est, "gkl")
    _, lq = _aligned(true_eta, log1m_est, "gkl")
    _check_form(form)
    if np.any((eta < 0) | (eta > 1)):
        raise MetricDomainError("true probabilities must lie in [0, 1]")
    if not (np.all(np.isfinite(lp)) and np.all(np.isfinite(lq))):
        raise MetricDomainError("estimated probabilities must lie strictly inside (0, 1)")
    cross = -(eta * lp + (1.0 - eta) * lq)
    if form == "cross_entropy":
        return float(np.mean(cross))
    neg_entropy = xlogy(eta, eta) + xlogy(1.0 - eta, 1.0 - eta)
    return float(np.mean(np.maximum(cross + neg_entropy, 0.0)))
