"""Simulation generators with known class probabilities, CSV I/O and splits.

Two synthetic problems are provided:

* ``disk``: points uniform on the unit disk, labelled by the sign of the
  first coordinate, with an exact fraction of labels flipped at random;
* ``sine``: ``x2 = y * (sin(x1) + eps)`` with ``x1 ~ U[0, 2 pi]`` and
  ``eps ~ N(1, 0.01)`` (variance 0.01).

``true_eta`` is always ``P(Y = +1 | x)``.
"""
from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from .errors import (
    CSVParseError,
    DimensionMismatchError,
    HeaderError,
    InvalidInputError,
    InvalidParameterError,
    LabelError,
    RaggedRowError,
)

__all__ = [
    "Dataset",
    "SplitSpec",
    "gen_disk",
    "gen_sine",
    "true_eta_sine",
    "generate",
    "load_csv",
    "save_csv",
    "split",
    "SINE_NOISE_VAR",
]

SINE_NOISE_VAR = 0.01
# mixed into split seeds so a split never reuses the generator's stream
_SPLIT_TAG = 0x5B11
_GENERATORS = ("disk", "sine")


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Inputs ``X`` (n x d), labels ``y`` in {-1, +1}, optional ``true_eta``."""

    X: np.ndarray
    y: np.ndarray
    true_eta: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        X = _frozen(self.X)
        if X.ndim == 1:
            X = _frozen(X.reshape(-1, 1))
        if X.ndim != 2:
            raise DimensionMismatchError("X must be a 2-D array")
        y = _frozen(np.asarray(self.y).ravel())
        if y.shape[0] != X.shape[0]:
            raise DimensionMismatchError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if not np.all((y == 1) | (y == -1)):
            raise InvalidInputError("labels must be -1 or +1")
        if not np.all(np.isfinite(X)):
            raise InvalidInputError("X contains non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.true_eta is not None:
            eta = _frozen(np.asarray(self.true_eta).ravel())
            if eta.shape != y.shape:
                raise DimensionMismatchError("true_eta must have one entry per row")
            if not np.all((eta >= 0) & (eta <= 1)):
                raise InvalidInputError("true_eta must lie in [0, 1]")
            object.__setattr__(self, "true_eta", eta)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def subset(self, idx, name=None) -> "Dataset":
        idx = np.asarray(idx)
        eta = None if self.true_eta is None else self.true_eta[idx]
        return Dataset(self.X[idx], self.y[idx], eta, self.name if name is None else name)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        if (self.true_eta is None) != (other.true_eta is None):
            return False
        same_eta = self.true_eta is None or np.array_equal(self.true_eta, other.true_eta)
        return (
            self.X.shape == other.X.shape
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
            and same_eta
        )

    __hash__ = None


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidParameterError(f"train_fraction must be in (0, 1), got {self.train_fraction!r}")


def _check_n(n):
    if int(n) != n or n < 2:
        raise InvalidParameterError(f"n must be an integer >= 2, got {n!r}")
    return int(n)


def gen_disk(n: int, flip_fraction: float = 0.2, seed: int = 0) -> Dataset:
    """Uniform points on the unit disk labelled by ``sign(x1)`` with flips.

    Exactly ``round(flip_fraction * n)`` labels, at distinct random indices,
    are flipped; ``true_eta`` is ``1 - flip_fraction`` where ``x1 >= 0`` and
    ``flip_fraction`` elsewhere.
    """
    n = _check_n(n)
    if not 0.0 <= flip_fraction <= 0.5:
        raise InvalidParameterError(f"flip_fraction must be in [0, 0.5], got {flip_fraction!r}")
    rng = np.random.default_rng(seed)
    pts = np.empty((0, 2))
    while pts.shape[0] < n:
        cand = rng.uniform(-1.0, 1.0, size=(2 * (n - pts.shape[0]) + 8, 2))
        pts = np.vstack([pts, cand[np.sum(cand * cand, axis=1) <= 1.0]])
    X = pts[:n]
    right = X[:, 0] >= 0
    y = np.where(right, 1.0, -1.0)
    flips = rng.choice(n, size=int(round(flip_fraction * n)), replace=False)
    y[flips] = -y[flips]
    eta = np.where(right, 1.0 - flip_fraction, flip_fraction)
    return Dataset(X, y, eta, "disk")


def true_eta_sine(x1, x2):
    """``P(Y = +1 | x)`` for the sine problem.

    Ratio of the normal densities ``N(x2 | +m, s2)`` and ``N(x2 | -m, s2)``
    with ``m = sin(x1) + 1``, which reduces to a logistic in
    ``2 * x2 * m / s2``.
    """
    m = np.sin(np.asarray(x1, dtype=float)) + 1.0
    p = expit(2.0 * np.asarray(x2, dtype=float) * m / SINE_NOISE_VAR)
    return float(p) if np.ndim(p) == 0 else p


def gen_sine(n: int, seed: int = 0) -> Dataset:
    """``x2 = y (sin x1 + eps)`` with ``x1 ~ U[0, 2 pi]``, ``eps ~ N(1, 0.01)``."""
    n = _check_n(n)
    rng = np.random.default_rng(seed)
    y = rng.choice([-1.0, 1.0], size=n)
    x1 = rng.uniform(0.0, 2.0 * math.pi, size=n)
    eps = rng.normal(1.0, math.sqrt(SINE_NOISE_VAR), size=n)
    x2 = y * (np.sin(x1) + eps)
    return Dataset(np.column_stack([x1, x2]), y, true_eta_sine(x1, x2), "sine")


def generate(kind: str, n: int, seed: int = 0, **kwargs) -> Dataset:
    """Dispatch to :func:`gen_disk` or :func:`gen_sine` by name."""
    if kind == "disk":
        return gen_disk(n, seed=seed, **kwargs)
    if kind == "sine":
        return gen_sine(n, seed=seed, **kwargs)
    raise InvalidParameterError(f"unknown generator {kind!r}; expected one of {_GENERATORS}")


def split(dataset: Dataset, spec: SplitSpec):
    """Seeded random train/test partition with ``round(fraction * n)`` training rows."""
    n = dataset.n
    n_train = int(round(spec.train_fraction * n))
    if n_train < 1 or n_train > n - 1:
        raise InvalidParameterError(
            f"train_fraction {spec.train_fraction} leaves an empty side for n={n}"
        )
    rng = np.random.default_rng([spec.seed, _SPLIT_TAG])
    perm = rng.permutation(n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    return dataset.subset(train_idx), dataset.subset(test_idx)


def save_csv(dataset: Dataset, path) -> None:
    """Write ``f0,...,f{d-1},y[,eta]`` with round-trip float formatting."""
    header = [f"f{j}" for j in range(dataset.d)] + ["y"]
    has_eta = dataset.true_eta is not None
    if has_eta:
        header.append("eta")
    lines = [",".join(header)]
    for i in range(dataset.n):
        row = [repr(float(v)) for v in dataset.X[i]]
        row.append(str(int(dataset.y[i])))
        if has_eta:
            row.append(repr(float(dataset.true_eta[i])))
        lines.append(",".join(row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        # mkstemp creates 0600; give the result the usual umask-derived mode
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_float(text, line, what):
    try:
        return float(text)
    except ValueError:
        raise CSVParseError(f"cannot parse {what} value {text!r}", line) from None


def load_csv(path, name: str = "") -> Dataset:
    """Read a dataset written by :func:`save_csv` (or any CSV with that header)."""
    with open(path, encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    if not raw or not raw[0].strip():
        raise HeaderError("missing header", 1)
    cols = [c.strip() for c in raw[0].split(",")]
    has_eta = cols[-1] == "eta"
    feats = cols[:-2] if has_eta else cols[:-1]
    label_col = cols[-2] if has_eta else cols[-1]
    if label_col != "y" or not feats or feats != [f"f{j}" for j in range(len(feats))]:
        raise HeaderError(f"expected header f0,...,f{{d-1}},y[,eta], got {raw[0]!r}", 1)
    d = len(feats)
    width = len(cols)
    X, y, eta = [], [], []
    for lineno, text in enumerate(raw[1:], start=2):
        if not text.strip():
            continue
        parts = text.split(",")
        if len(parts) != width:
            raise RaggedRowError(f"expected {width} fields, found {len(parts)}", lineno)
        X.append([_parse_float(p, lineno, f"f{j}") for j, p in enumerate(parts[:d])])
        label = parts[d].strip()
        if label in ("1", "+1", "1.0"):
            y.append(1.0)
        elif label in ("-1", "-1.0"):
            y.append(-1.0)
        else:
            raise LabelError(f"label must be -1 or +1, got {label!r}", lineno)
        if has_eta:
            e = _parse_float(parts[d + 1], lineno, "eta")
            if not 0.0 <= e <= 1.0:
                raise CSVParseError(f"eta must lie in [0, 1], got {e!r}", lineno)
            eta.append(e)
    if not y:
        raise CSVParseError("no data rows", len(raw) + 1)
    X = np.array(X, dtype=float).reshape(len(y), d)
    return Dataset(X, np.array(y), np.array(eta) if has_eta else None, name)
