"""Multi-replication simulation harness.

A :class:`Protocol` names a generator, a train/test split, a kernel
bandwidth rule and a list of methods.  Each replication ``r`` regenerates
the data and the split from seed ``base_seed + r``, tunes every method by
cross-validation on the training part and scores it on the test part.

Recorded metrics are named ``<method>.<quantity>`` or
``<method>.<probability>.<quantity>``, for example ``svm.crho.gkl``,
``svm.cer`` or ``c_learning.rho_hat``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import xlogy

from .calibration import fit_rho, platt_fit
from .data import SplitSpec, generate, split
from .errors import CLearnError, InvalidParameterError
from .kernels import KernelSpec, gram, sigma_mean_pairwise, sigma_median_between_classes
from .losses import LossParams, softplus
from .metrics import cer, gkl_from_log
from .model_selection import _svm_solver, cv_c_learning, cv_svm
from .population import eta_tilde_sign, log_eta_tilde
from .solver import TrainConfig, fit_kernel, fit_linear

__all__ = [
    "MethodSpec",
    "Protocol",
    "ReplicationReport",
    "ReplicationResult",
    "run_replication",
    "replicate",
    "summarize",
]

_SVM_PROBS = ("crho", "platt", "sollich")


@dataclass(frozen=True)
class MethodSpec:
    """One method of the chain.

    ``kind`` is ``"svm"`` (hinge-loss SVM followed by the probability maps
    in ``probabilities``) or ``"c_learning"`` (probabilities from the
    inverse population minimizer at the training ``rho`` with ``u = 1``).
    Single-element grids skip cross-validation.
    """

    name: str
    kind: str
    gamma_grid: tuple = (1e-3, 1e-2, 1e-1)
    omega_grid: tuple = (0.5,)
    rho: float = 1.0
    loss_scale: str = "c_loss"
    expansion: str = "kernel"
    solver: str = "libsvm"
    probabilities: tuple = ("crho",)

    def __post_init__(self):
        object.__setattr__(self, "gamma_grid", tuple(float(g) for g in self.gamma_grid))
        object.__setattr__(self, "omega_grid", tuple(float(o) for o in self.omega_grid))
        object.__setattr__(self, "probabilities", tuple(self.probabilities))
        if not self.name or "." in self.name:
            raise InvalidParameterError(f"method name must be nonempty without dots, got {self.name!r}")
        if self.kind not in ("svm", "c_learning"):
            raise InvalidParameterError(f"method kind must be 'svm' or 'c_learning', got {self.kind!r}")
        if not self.gamma_grid or not self.omega_grid:
            raise InvalidParameterError("grids must be nonempty")
        if self.expansion not in ("kernel", "linear"):
            raise InvalidParameterError(f"expansion must be 'kernel' or 'linear', got {self.expansion!r}")
        if self.kind == "svm":
            _svm_solver(self.solver)
            bad = set(self.probabilities) - set(_SVM_PROBS)
            if bad:
                raise InvalidParameterError(f"unknown probability maps {sorted(bad)}")
            if self.expansion != "kernel":
                raise InvalidParameterError("the SVM method is kernel-only")


@dataclass(frozen=True)
class Protocol:
    generator: str = "disk"
    n: int = 1000
    train_fraction: float = 0.1
    generator_args: dict = field(default_factory=dict)
    sigma: object = "median"
    cv_folds: int = 5
    gkl_form: str = "divergence"
    methods: tuple = ()

    def __post_init__(self):
        methods = tuple(m if isinstance(m, MethodSpec) else MethodSpec(**m) for m in self.methods)
        object.__setattr__(self, "methods", methods)
        if not methods:
            raise InvalidParameterError("protocol needs at least one method")
        names = [m.name for m in methods]
        if len(set(names)) != len(names):
            raise InvalidParameterError("method names must be unique")
        if self.generator not in ("disk", "sine"):
            raise InvalidParameterError(f"unknown generator {self.generator!r}")
        if self.gkl_form not in ("divergence", "cross_entropy"):
            raise InvalidParameterError(f"unknown gkl_form {self.gkl_form!r}")
        if not (self.sigma in ("median", "mean") or (isinstance(self.sigma, (int, float)) and self.sigma > 0)):
            raise InvalidParameterError(f"sigma must be 'median', 'mean' or a positive number, got {self.sigma!r}")
        SplitSpec(self.train_fraction, 0)

    @classmethod
    def from_dict(cls, d: dict) -> "Protocol":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidParameterError(f"unknown protocol fields {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["methods"] = [asdict(m) for m in self.methods]
        return json.loads(json.dumps(d))


def _bandwidth(rule, X, y):
    if rule == "median":
        return sigma_median_between_classes(X, y)
    if rule == "mean":
        return sigma_mean_pairwise(X)
    return float(rule)


def _log_probs(kind, f_train, y_train, f_test, record, prefix):
    """``(log p, log(1 - p), sign(p - 1/2))`` on the test scores for one probability map."""
    if kind == "crho":
        cal = fit_rho(f_train, y_train)
        record[f"{prefix}.rho_hat"] = cal.rho_hat
        p = LossParams(rho=cal.rho_hat, u=1.0)
        return (*log_eta_tilde(p, f_test), eta_tilde_sign(p, f_test))
    if kind == "platt":
        fit = platt_fit(f_train, y_train)
        u = fit.A * f_test + fit.B
        return -softplus(u), -softplus(-u), -np.sign(u)
    arg = np.where(np.abs(f_test) <= 1.0, 2.0 * f_test, f_test + np.sign(f_test))
    return -softplus(-arg), -softplus(arg), np.sign(arg)


def _prob_metrics(record, key, log_p, log_q, side, eta, y, form):
    record[f"{key}.gkl"] = gkl_from_log(eta, log_p, log_q, form)
    # p > 1/2 is decided from the exact side of 1/2; p itself can round to 1/2 at small rho
    p = 0.5 + 0.5 * np.asarray(side, dtype=float)
    record[f"{key}.cer"] = cer(p, y, mode="probability")


def _run_method(m: MethodSpec, protocol: Protocol, seed, Xtr, ytr, Xte, yte, eta, spec, Ktr, Kte, record):
    k = protocol.cv_folds
    if m.kind == "svm":
        if len(m.gamma_grid) > 1:
            gamma = cv_svm(Xtr, ytr, m.gamma_grid, spec=spec, solver=m.solver, k=k, seed=seed, K=Ktr).best["gamma"]
        else:
            gamma = m.gamma_grid[0]
        model = _svm_solver(m.solver)(Xtr, ytr, spec, gamma, K=Ktr)
        f_tr = model.decision_function(Xtr, K=Ktr)
        f_te = model.decision_function(Xte, K=Kte)
        record[f"{m.name}.gamma"] = gamma
        record[f"{m.name}.cer"] = cer(f_te, yte)
        for kind in m.probabilities:
            key = f"{m.name}.{kind}"
            log_p, log_q, side = _log_probs(kind, f_tr, ytr, f_te, record, m.name)
            _prob_metrics(record, key, log_p, log_q, side, eta, yte, protocol.gkl_form)
        return

    kernel = m.expansion == "kernel"
    if len(m.gamma_grid) * len(m.omega_grid) > 1:
        best = cv_c_learning(
            Xtr, ytr, m.gamma_grid, m.omega_grid, spec=spec if kernel else None, rho=m.rho,
            loss_scale=m.loss_scale, k=k, seed=seed, K=Ktr if kernel else None,
        ).best
    else:
        best = {"gamma": m.gamma_grid[0], "omega": m.omega_grid[0]}
    cfg = TrainConfig(gamma=best["gamma"], omega=best["omega"], rho=m.rho, loss_scale=m.loss_scale)
    if kernel:
        model = fit_kernel(Xtr, ytr, spec, cfg, K=Ktr)
        f_te = model.decision_function(Xte, K=Kte)
    else:
        model = fit_linear(Xtr, ytr, cfg)
        f_te = model.decision_function(Xte)
    record[f"{m.name}.gamma"] = cfg.gamma
    record[f"{m.name}.omega"] = cfg.omega
    record[f"{m.name}.converged"] = float(model.info.converged)
    record[f"{m.name}.cer"] = cer(f_te, yte)
    p = LossParams(rho=m.rho, u=1.0)
    log_p, log_q = log_eta_tilde(p, f_te)
    _prob_metrics(record, f"{m.name}.eta_tilde", log_p, log_q, eta_tilde_sign(p, f_te), eta, yte,
                  protocol.gkl_form)


def run_replication(protocol: Protocol, seed: int) -> dict:
    """Run every method once on the data drawn from ``seed``; returns metric -> value."""
    data = generate(protocol.generator, protocol.n, seed=seed, **protocol.generator_args)
    train, test = split(data, SplitSpec(protocol.train_fraction, seed))
    Xtr, ytr, Xte, yte, eta = train.X, train.y, test.X, test.y, test.true_eta
    sigma = _bandwidth(protocol.sigma, Xtr, ytr)
    spec = KernelSpec("rbf", sigma)
    Ktr = gram(spec, Xtr)
    Kte = gram(spec, Xte, Xtr)
    record = {"sigma": sigma}
    record["bayes.cer"] = cer(eta, yte, mode="probability")
    record["bayes.entropy"] = float(np.mean(-xlogy(eta, eta) - xlogy(1.0 - eta, 1.0 - eta)))
    for m in protocol.methods:
        _run_method(m, protocol, seed, Xtr, ytr, Xte, yte, eta, spec, Ktr, Kte, record)
    return record


@dataclass(frozen=True)
class ReplicationReport:
    """Summary of one metric across successful replications."""

    metric: str
    values: tuple
    seeds: tuple
    mean: float
    std: float
    n: int

    @classmethod
    def from_values(cls, metric, values, seeds):
        v = np.asarray(values, dtype=float)
        n = v.size
        mean = float(np.mean(v)) if n else math.nan
        std = float(np.std(v, ddof=1)) if n > 1 else (0.0 if n == 1 else math.nan)
        return cls(metric, tuple(float(x) for x in v), tuple(int(s) for s in seeds), mean, std, n)


@dataclass
class ReplicationResult:
    protocol: Protocol
    base_seed: int
    n_reps: int
    rows: list
    failures: list
    reports: dict

    def metric(self, name) -> ReplicationReport:
        return self.reports[name]

    def per_rep_csv(self) -> str:
        buf = io.StringIO()
        names = sorted(self.reports)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seed"] + names)
        for row in self.rows:
            w.writerow([row["seed"]] + [repr(float(row[k])) for k in names])
        return buf.getvalue()

    def long_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seed", "method", "metric", "value"])
        for row in self.rows:
            for k in sorted(self.reports):
                method, _, quantity = k.partition(".")
                if not quantity:
                    method, quantity = "", method
                w.writerow([row["seed"], method, quantity, repr(float(row[k]))])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "protocol": self.protocol.to_dict(),
            "base_seed": self.base_seed,
            "n_reps": self.n_reps,
            "n_ok": len(self.rows),
            "n_failed": len(self.failures),
            "failures": [{"seed": s, "error": msg} for s, msg in self.failures],
            "metrics": {
                k: {"mean": r.mean, "std": r.std, "n": r.n} for k, r in sorted(self.reports.items())
            },
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"


def _safe_run(args):
    protocol, seed = args
    try:
        return seed, run_replication(protocol, seed), None
    except (CLearnError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        return seed, None, f"{type(exc).__name__}: {exc}"


def summarize(protocol, base_seed, n_reps, outcomes) -> ReplicationResult:
    """Aggregate ``(seed, record, error)`` triples in seed order."""
    outcomes = sorted(outcomes, key=lambda t: t[0])
    rows, failures = [], []
    for seed, record, err in outcomes:
        if err is None:
            rows.append({"seed": seed, **record})
        else:
            failures.append((seed, err))
    names = sorted({k for r in rows for k in r if k != "seed"})
    reports = {}
    for k in names:
        pairs = [(r["seed"], r[k]) for r in rows if k in r]
        reports[k] = ReplicationReport.from_values(k, [v for _, v in pairs], [s for s, _ in pairs])
    return ReplicationResult(protocol, base_seed, n_reps, rows, failures, reports)


def replicate(protocol, n_reps: int, base_seed: int = 0, n_jobs: int = 1) -> ReplicationResult:
    """Run ``n_reps`` replications with seeds ``base_seed, base_seed + 1, ...``.

    Failed replications are excluded from the summaries and listed in
    ``failures``.  Results do not depend on ``n_jobs``.
    """
    if isinstance(protocol, dict):
        protocol = Protocol.from_dict(protocol)
    if n_reps < 1:
        raise InvalidParameterError(f"n_reps must be positive, got {n_reps}")
    jobs = [(protocol, base_seed + r) for r in range(n_reps)]
    if n_jobs == 1:
        outcomes = [_safe_run(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(_safe_run, jobs))
    return summarize(protocol, base_seed, n_reps, outcomes)
