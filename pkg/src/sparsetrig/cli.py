"""Command-line interface: ``sparsetrig {experiment,recover,bounds,analyze}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds as B
from .analysis import coherence, ric_exhaustive, ric_monte_carlo
from .bpdn import BpdnConfig, bpdn_solve
from .errors import SparseTrigError
from .fourier_ops import (
    MeasurementOperator,
    draw_noise_on_sphere,
    draw_samples,
    draw_sparse_coefficients,
    make_frequency_set,
)
from .harness import ExperimentConfig, default_threads, emit, run_sweep
from .omp import OmpConfig, omp_recover

# descriptive name -> (function, aliases)
BOUNDS = {
    "eigval": (B.eigval_condition, ("6.1",)),
    "correlation-tail": (B.omp_correlation_tail, ("lemma6.2",)),
    "coherence-tail": (B.coherence_tail, ("coherence",)),
    "omp-first-step": (B.omp_first_step_conditions, ("4.1",)),
    "omp-uniform": (B.uniform_omp_conditions, ("4.2",)),
    "coherence-guarantee": (B.dete_guarantee, ("6.3",)),
    "rip-samples": (B.rip_sample_condition, ("3.3",)),
}
_ALIASES = {a: name for name, (_, al) in BOUNDS.items() for a in al}


def _model_arg(label):
    return {"FFT": "FFT", "NFFT": "NFFT"}.get(label.upper(), label)


def _instance(args):
    fs = make_frequency_set(args.d, args.gamma)
    cfg = ExperimentConfig(N=args.n, d=args.d, gamma=args.gamma, q=args.q)
    X = draw_samples(fs, cfg.sampling_model(_model_arg(args.model)), args.n, args.seed)
    return fs, MeasurementOperator(fs, X)


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return obj.to_dict() if hasattr(obj, "to_dict") else dataclasses.asdict(obj)
    if isinstance(obj, tuple) and hasattr(obj, "_asdict"):
        return obj._asdict()
    return obj


def cmd_experiment(args):
    cfg = ExperimentConfig.from_json(args.config)
    if args.trials is not None:
        cfg = dataclasses.replace(cfg, trials=args.trials)
    stats = run_sweep(cfg, threads=args.threads)
    fmt = args.format or ("json" if str(args.out).endswith(".json") else "csv")
    emit(stats, fmt, args.out, include_records=args.records)
    for r in stats.rows:
        print(
            f"{r.sweep_var}={r.sweep_value:g} {r.method:4s} {r.model:6s} "
            f"success={r.success_rate:.3f} mean_err={r.mean_l2_error:.4g}"
        )
    return 0


def cmd_recover(args):
    fs, op = _instance(args)
    c = draw_sparse_coefficients(fs, args.m, args.seed)
    y = op.forward(c.values) + draw_noise_on_sphere(op.N, args.sigma, args.seed)
    if args.method == "omp":
        if args.stop_at_sigma:
            cfg = OmpConfig(residual_tol=args.sigma)
        else:
            cfg = OmpConfig(max_sparsity=args.m)
        res = omp_recover(op, y, cfg)
        est = res.coefficients.values
        out = res.to_dict()
    else:
        res = bpdn_solve(op, y, BpdnConfig(sigma=args.sigma))
        est = res.coefficients
        out = res.to_dict()
    out["true_support"] = list(c.support)
    out["l2_error"] = float(np.linalg.norm(est - c.values))
    print(json.dumps(out, indent=1))
    return 0


def cmd_bounds(args):
    name = _ALIASES.get(args.theorem, args.theorem)
    if name not in BOUNDS:
        raise ValueError(f"unknown bound {args.theorem!r}; choose from {sorted(BOUNDS) + sorted(_ALIASES)}")
    params = json.loads(args.params)
    report = BOUNDS[name][0](**params)
    print(json.dumps({"bound": name, "params": params, "report": _jsonable(report)}, indent=1))
    return 0


def cmd_analyze(args):
    _, op = _instance(args)
    if args.what == "coherence":
        report = coherence(op)
    elif args.trials:
        report = ric_monte_carlo(op, args.m, args.trials, args.seed)
    else:
        report = ric_exhaustive(op, args.m)
    print(json.dumps(report.to_dict(), indent=1))
    return 0


def _add_instance(p):
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--gamma", default="symmetric:256", help="frequency set, e.g. symmetric:256")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--model", default="NFFT", help="FFT, NFFT, continuous, grid:q or subset:q")
    p.add_argument("--q", type=int, default=None, help="grid size for FFT (default D)")
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="sparsetrig", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("experiment", help="run a Monte-Carlo sweep")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--threads", type=int, default=None, help="worker processes (default $SPARSETRIG_THREADS or 1)")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--records", action="store_true", help="include per-trial records in JSON output")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("recover", help="recover one random instance")
    _add_instance(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--method", choices=("omp", "bpdn"), default="omp")
    p.add_argument("--stop-at-sigma", action="store_true", help="OMP stops once the residual is <= sigma")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("bounds", help="evaluate a closed-form condition or tail bound")
    p.add_argument("--theorem", required=True, help=", ".join(list(BOUNDS) + list(_ALIASES)))
    p.add_argument("--params", required=True, help="JSON object of keyword arguments")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("analyze", help="coherence or restricted isometry constant")
    _add_instance(p)
    p.add_argument("--what", choices=("coherence", "ric"), required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--trials", type=int, default=0, help="random subsets; 0 means exhaustive")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None) is None and args.command == "experiment":
        args.threads = default_threads()
    try:
        return args.func(args)
    except (SparseTrigError, ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
