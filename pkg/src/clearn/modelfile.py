"""JSON persistence for fitted models.

Floats are written with their shortest round-trip representation, so a
loaded model reproduces the saved model's predictions bit for bit.
"""
from __future__ import annotations

import json

import numpy as np

from .data import atomic_write_text
from .errors import CLearnError, InvalidInputError
from .kernels import KernelSpec
from .solver import FitInfo, KernelModel, LinearModel, TrainConfig

__all__ = ["SCHEMA_VERSION", "model_to_dict", "model_from_dict", "save_model", "load_model"]

SCHEMA_VERSION = 1


def model_to_dict(model, *, method="c_learning", calibration=None, selection=None) -> dict:
    """Serializable description of a kernel or linear model."""
    d = {"schema_version": SCHEMA_VERSION, "method": method}
    if isinstance(model, KernelModel):
        d.update(
            kind="kernel",
            offset=float(model.alpha),
            coefficients=[float(v) for v in model.beta],
            kernel=model.spec.to_dict(),
            support_inputs=[[float(v) for v in row] for row in model.support_inputs],
        )
    elif isinstance(model, LinearModel):
        d.update(kind="linear", offset=float(model.a), coefficients=[float(v) for v in model.b])
    else:
        raise InvalidInputError(f"cannot serialize {type(model).__name__}")
    d["config"] = model.config.to_dict() if model.config is not None else None
    if model.info is not None:
        d["fit_info"] = {
            "converged": bool(model.info.converged),
            "n_outer": int(model.info.n_outer),
            "n_inner": int(model.info.n_inner),
            "backend": model.info.backend,
        }
    d["calibration"] = calibration
    d["selection"] = selection
    return d


def model_from_dict(d: dict):
    """Rebuild a model from :func:`model_to_dict` output."""
    try:
        version = d["schema_version"]
        kind = d["kind"]
    except (KeyError, TypeError):
        raise InvalidInputError("model file lacks schema_version or kind") from None
    if version != SCHEMA_VERSION:
        raise InvalidInputError(f"unsupported model schema version {version!r}")
    cfg = TrainConfig(**d["config"]) if d.get("config") else None
    fi = d.get("fit_info")
    info = FitInfo(fi["converged"], fi["n_outer"], fi["n_inner"], backend=fi["backend"]) if fi else None
    coef = np.array(d["coefficients"], dtype=float)
    if kind == "kernel":
        return KernelModel(
            alpha=float(d["offset"]),
            beta=coef,
            spec=KernelSpec.from_dict(d["kernel"]),
            support_inputs=np.array(d["support_inputs"], dtype=float).reshape(coef.size, -1),
            config=cfg,
            info=info,
        )
    if kind == "linear":
        return LinearModel(a=float(d["offset"]), b=coef, config=cfg, info=info)
    raise InvalidInputError(f"unknown model kind {kind!r}")


def save_model(model, path, **extra) -> None:
    atomic_write_text(path, json.dumps(model_to_dict(model, **extra), indent=1) + "\n")


def load_model(path):
    """Return ``(model, raw_dict)``."""
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"model file is not valid JSON: {exc}") from None
    try:
        return model_from_dict(d), d
    except CLearnError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed model file: {exc}") from None
