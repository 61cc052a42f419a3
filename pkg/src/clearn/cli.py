"""Command-line interface: ``clearn simulate|train|predict|calibrate|replicate``.

Every command exits 0 on success.  On failure a single line
``error: <ErrorType>: <message>`` goes to stderr and the exit status is 1
(2 for usage errors, as usual for argparse).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .calibration import PlattFit, fit_rho, platt_fit, platt_prob, sollich_prob, svm_prob
from .data import atomic_write_text, generate, load_csv, save_csv
from .errors import CLearnError, InvalidParameterError, SingleClassError
from .evaluation import Protocol, replicate
from .kernels import KernelSpec, gram, sigma_mean_pairwise, sigma_median_between_classes
from .model_selection import cv_c_learning, cv_svm
from .modelfile import load_model, save_model
from .solver import KernelModel, TrainConfig, fit_kernel, fit_linear, fit_svm_libsvm

__all__ = ["main", "build_parser"]


def _floats(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _bandwidth(args, X, y):
    if args.sigma_mode == "median":
        return sigma_median_between_classes(X, y)
    if args.sigma_mode == "mean":
        return sigma_mean_pairwise(X)
    if args.sigma is None or not args.sigma > 0:
        raise InvalidParameterError("--sigma-mode explicit needs a positive --sigma")
    return args.sigma


def cmd_simulate(args):
    kwargs = {}
    if args.flip_fraction is not None:
        if args.kind != "disk":
            raise InvalidParameterError("--flip-fraction applies to the disk generator only")
        kwargs["flip_fraction"] = args.flip_fraction
    ds = generate(args.kind, args.n, seed=args.seed, **kwargs)
    save_csv(ds, args.out)
    return {"rows": ds.n, "out": args.out}


def cmd_train(args):
    ds = load_csv(args.data)
    X, y = ds.X, ds.y
    if np.all(y == y[0]):
        raise SingleClassError("training data must contain both classes")
    gammas = args.gamma_grid or [args.gamma]
    omegas = args.omega_grid or [args.omega]
    kernel = args.expansion == "kernel"
    spec = K = None
    if kernel:
        spec = KernelSpec("rbf", _bandwidth(args, X, y)) if args.kernel == "rbf" else KernelSpec("linear")
        K = gram(spec, X)
    selection = None

    if args.method == "svm":
        if not kernel:
            raise InvalidParameterError("--method svm needs --expansion kernel")
        if len(gammas) > 1:
            cv = cv_svm(X, y, gammas, spec=spec, k=args.cv_folds, seed=args.seed, K=K)
            selection = {"best": cv.best, "grid": cv.grid, "mean_cer": cv.mean_cer}
            gamma = cv.best["gamma"]
        else:
            gamma = gammas[0]
        model = fit_svm_libsvm(X, y, spec, gamma, K=K)
        model.config = TrainConfig(gamma=gamma, omega=0.0, rho=args.rho, loss_scale=args.loss_scale)
        crho_default = None
    else:
        if len(gammas) * len(omegas) > 1:
            cv = cv_c_learning(
                X, y, gammas, omegas, spec=spec, rho=args.rho, loss_scale=args.loss_scale,
                k=args.cv_folds, seed=args.seed, K=K,
            )
            selection = {"best": cv.best, "grid": cv.grid, "mean_cer": cv.mean_cer}
            gamma, omega = cv.best["gamma"], cv.best["omega"]
        else:
            gamma, omega = gammas[0], omegas[0]
        cfg = TrainConfig(
            gamma=gamma, omega=omega, rho=args.rho, loss_scale=args.loss_scale,
            max_outer=args.max_outer, max_inner=args.max_inner,
        )
        model = fit_kernel(X, y, spec, cfg, K=K) if kernel else fit_linear(X, y, cfg)
        crho_default = args.rho

    scores = model.decision_function(X, K=K) if kernel else model.decision_function(X)
    cal = fit_rho(scores, y)
    platt = platt_fit(scores, y)
    calibration = {
        "crho": crho_default if crho_default is not None else cal.rho_hat,
        "rho_hat": cal.rho_hat,
        "ekl": cal.ekl_value,
        "platt": {"A": platt.A, "B": platt.B, "capped": platt.capped},
    }
    save_model(model, args.model_out, method=args.method.replace("-", "_"),
               calibration=calibration, selection=selection)
    return {
        "model_out": args.model_out,
        "gamma": model.config.gamma,
        "omega": model.config.omega,
        "converged": bool(model.info.converged),
    }


def _scores(model, X):
    if isinstance(model, KernelModel):
        if X.shape[1] != model.support_inputs.shape[1]:
            raise InvalidParameterError(
                f"model expects {model.support_inputs.shape[1]} features, data has {X.shape[1]}"
            )
    return model.decision_function(X)


def cmd_predict(args):
    model, raw = load_model(args.model)
    ds = load_csv(args.data)
    f = _scores(model, ds.X)
    cal = raw.get("calibration") or {}
    mode = args.with_probability
    if mode == "none":
        prob = None
    elif mode == "crho":
        rho = args.rho if args.rho is not None else cal.get("crho")
        if rho is None:
            raise InvalidParameterError("no temperature stored in the model; pass --rho")
        prob = svm_prob(rho, f)
    elif mode == "platt":
        p = cal.get("platt")
        if p is None:
            raise InvalidParameterError("model file has no Platt parameters")
        prob = platt_prob(PlattFit(p["A"], p["B"]), f)
    else:
        prob = sollich_prob(f)
    lines = ["score,label" + (",prob" if prob is not None else "")]
    for i in range(f.size):
        label = 1 if f[i] > 0 else -1
        row = f"{float(f[i])!r},{label}"
        if prob is not None:
            row += f",{float(prob[i])!r}"
        lines.append(row)
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    return {"rows": int(f.size), "out": args.out}


def cmd_calibrate(args):
    model, _ = load_model(args.model)
    ds = load_csv(args.data)
    f = _scores(model, ds.X)
    cal = fit_rho(f, ds.y)
    out = {"rho_hat": cal.rho_hat, "ekl": cal.ekl_value, "iterations": cal.iterations, "n": int(f.size)}
    atomic_write_text(args.out, json.dumps(out, indent=2, sort_keys=True) + "\n")
    return out


def cmd_replicate(args):
    with open(args.protocol, encoding="utf-8") as fh:
        try:
            proto = Protocol.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise InvalidParameterError(f"protocol is not valid JSON: {exc}") from None
    result = replicate(proto, args.n_reps, base_seed=args.seed, n_jobs=args.jobs)
    os.makedirs(args.out_dir, exist_ok=True)
    atomic_write_text(os.path.join(args.out_dir, "per_rep.csv"), result.per_rep_csv())
    atomic_write_text(os.path.join(args.out_dir, "summary.json"), result.summary_json())
    atomic_write_text(os.path.join(args.out_dir, "long.csv"), result.long_csv())
    return {"out_dir": args.out_dir, "n_ok": len(result.rows), "n_failed": len(result.failures)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clearn", description="C-learning experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a simulated dataset to CSV")
    p.add_argument("--kind", choices=["disk", "sine"], required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--flip-fraction", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit a model, optionally tuning (gamma, omega) by k-fold CV")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=["c-learning", "svm"], default="c-learning")
    p.add_argument("--expansion", choices=["kernel", "linear"], default="kernel")
    p.add_argument("--kernel", choices=["rbf", "linear"], default="rbf")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--omega", type=float, default=0.5)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--sigma-mode", choices=["median", "mean", "explicit"], default="median")
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--loss-scale", choices=["c_loss", "v_loss"], default="c_loss")
    p.add_argument("--gamma-grid", type=_floats, default=None)
    p.add_argument("--omega-grid", type=_floats, default=None)
    p.add_argument("--cv-folds", type=int, default=5)
    p.add_argument("--max-outer", type=int, default=100)
    p.add_argument("--max-inner", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a CSV with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--with-probability", choices=["none", "crho", "platt", "sollich"], default="none")
    p.add_argument("--rho", type=float, default=None, help="temperature for crho (defaults to the model's)")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; prediction is deterministic")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("calibrate", help="fit the probability temperature on a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; calibration is deterministic")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("replicate", help="run a JSON simulation protocol over many seeds")
    p.add_argument("--protocol", required=True)
    p.add_argument("--n-reps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0, help="base seed; replication r uses seed + r")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_replicate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except (CLearnError, OSError, ValueError, ArithmeticError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    print(json.dumps(result, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
