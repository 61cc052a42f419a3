"""Coherence functions, C-losses and the classical margin surrogates.

All functions are vectorized over ``z`` (scalars in, scalars out).  The
margin argument is ``z = y * f(x)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidParameterError

__all__ = [
    "LossParams",
    "SurrogateKind",
    "softplus",
    "coherence_v",
    "coherence_grad",
    "c_loss",
    "c_loss_grad",
    "c_loss_hess",
    "l_loss",
    "classical_surrogate",
    "surrogate",
]


@dataclass(frozen=True)
class LossParams:
    """Temperature ``rho`` and margin target ``u`` of the coherence family."""

    rho: float = 1.0
    u: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise InvalidParameterError(f"rho must be positive and finite, got {self.rho!r}")
        if not (math.isfinite(self.u) and self.u >= 0):
            raise InvalidParameterError(f"u must be nonnegative and finite, got {self.u!r}")

    def require_positive_u(self):
        if self.u <= 0:
            raise InvalidParameterError("the C-loss is only defined for u > 0")


class SurrogateKind(str, enum.Enum):
    COHERENCE_V = "coherence_v"
    C_LOSS = "c_loss"
    L_LOSS = "l_loss"
    HINGE = "hinge"
    LOGIT = "logit"
    EXPONENTIAL = "exponential"
    SQUARED_HINGE = "squared_hinge"


_CLASSICAL = {
    SurrogateKind.HINGE,
    SurrogateKind.LOGIT,
    SurrogateKind.EXPONENTIAL,
    SurrogateKind.SQUARED_HINGE,
}


def _finite(z):
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("margin values must be finite")
    return arr


def _out(arr):
    return float(arr) if arr.ndim == 0 else arr


def softplus(t):
    """``log(1 + exp(t))`` without overflow for large ``|t|``."""
    t = np.asarray(t, dtype=float)
    return np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))


def _sigmoid(t):
    t = np.asarray(t, dtype=float)
    e = np.exp(-np.abs(t))
    return np.where(t >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _c_scale(p: LossParams) -> float:
    # u / log(1 + exp(u/rho))
    return p.u / float(softplus(p.u / p.rho))


def coherence_v(p: LossParams, z):
    """``rho * log(1 + exp((u - z) / rho))``."""
    z = _finite(z)
    return _out(p.rho * softplus((p.u - z) / p.rho))


def coherence_grad(p: LossParams, z):
    """Derivative of :func:`coherence_v` in ``z``; lies in ``[-1, 0]``."""
    z = _finite(z)
    return _out(-_sigmoid((p.u - z) / p.rho))


def c_loss(p: LossParams, z):
    """C-loss, the coherence function rescaled to equal ``u`` at ``z = 0``."""
    p.require_positive_u()
    z = _finite(z)
    return _out(_c_scale(p) * softplus((p.u - z) / p.rho))


def c_loss_grad(p: LossParams, z):
    p.require_positive_u()
    z = _finite(z)
    return _out(-_c_scale(p) / p.rho * _sigmoid((p.u - z) / p.rho))


def c_loss_hess(p: LossParams, z):
    """Second derivative of the C-loss.

    Positive for every finite ``z``; it underflows to zero only once
    ``|u - z| / rho`` exceeds roughly 745.
    """
    p.require_positive_u()
    z = _finite(z)
    # sigmoid(t) * sigmoid(-t) = e / (1 + e)^2 with e = exp(-|t|), free of cancellation
    e = np.exp(-np.abs((p.u - z) / p.rho))
    return _out(_c_scale(p) / p.rho**2 * e / (1.0 + e) ** 2)


def l_loss(p: LossParams, z):
    """Coherence function normalized to 1 at ``z = 0`` (defined for ``u >= 0``)."""
    z = _finite(z)
    return _out(softplus((p.u - z) / p.rho) / float(softplus(p.u / p.rho)))


def classical_surrogate(kind, z):
    """Hinge, logit (scaled to 1 at 0), exponential and squared-hinge losses."""
    kind = SurrogateKind(kind)
    if kind not in _CLASSICAL:
        raise InvalidParameterError(
            f"{kind.value} is a coherence-family loss; use its dedicated function"
        )
    z = _finite(z)
    if kind is SurrogateKind.HINGE:
        val = np.maximum(1.0 - z, 0.0)
    elif kind is SurrogateKind.LOGIT:
        val = softplus(-z) / math.log(2.0)
    elif kind is SurrogateKind.EXPONENTIAL:
        val = np.exp(-z / 2.0)
    else:
        val = np.maximum(1.0 - z, 0.0) ** 2
    return _out(val)


def surrogate(kind, z, params: LossParams | None = None):
    """Evaluate any :class:`SurrogateKind`; coherence kinds need ``params``."""
    kind = SurrogateKind(kind)
    if kind in _CLASSICAL:
        return classical_surrogate(kind, z)
    if params is None:
        raise InvalidParameterError(f"{kind.value} requires LossParams")
    fn = {
        SurrogateKind.COHERENCE_V: coherence_v,
        SurrogateKind.C_LOSS: c_loss,
        SurrogateKind.L_LOSS: l_loss,
    }[kind]
    return fn(params, z)
