#!/usr/bin/env python3
"""Regenerate the reference solutions in tests/fixtures/bpdn/.

Each fixture is a small noisy instance solved by an interior-point conic
solver through cvxpy, which shares no code with the package's own solver.
Only the instance generation (frequency set, points, coefficients, noise)
comes from the package; the sample vector and points are stored verbatim so
the fixtures stay valid even if the random streams change.

Schema (one JSON object per file)::

    seed, D, N, M, sigma        instance parameters
    gamma                       frequency descriptor, e.g. "range:0:9"
    model                       sampling model, e.g. {"kind": "continuous"}
    points                      N x 1 sampling points
    y                           N samples as [re, im] pairs
    c_true                      D true coefficients as [re, im] pairs
    reference_l1                optimal objective from the reference solver
    reference_solution          D optimal coefficients as [re, im] pairs
    reference_solver            solver name and tolerance used

Usage: python tools/make_bpdn_fixtures.py [outdir]
"""

import json
import sys
from pathlib import Path

import cvxpy as cp
import numpy as np

from sparsetrig.fourier_ops import (
    MeasurementOperator,
    draw_noise_on_sphere,
    draw_samples,
    draw_sparse_coefficients,
    make_frequency_set,
)

INSTANCES = [
    # seed, D, N, M, sigma, model
    (101, 10, 6, 2, 0.1, "continuous"),
    (102, 8, 5, 1, 0.0, "continuous"),
    (103, 12, 8, 3, 0.05, "continuous"),
    (104, 12, 10, 3, 0.3, "continuous"),
    (105, 10, 7, 2, 0.0, "subset:16"),
    (106, 12, 9, 2, 0.2, "subset:16"),
    (107, 8, 6, 3, 0.1, "grid:16"),
    (108, 12, 6, 1, 0.5, "continuous"),
    (109, 11, 10, 3, 0.0, "continuous"),
    (110, 10, 8, 2, 1.0, "subset:12"),
]


def pairs(v):
    return [[float(z.real), float(z.imag)] for z in v]


def solve_reference(F, y, sigma):
    c = cp.Variable(F.shape[1], complex=True)
    if sigma > 0:
        cons = [cp.norm(F @ c - y, 2) <= sigma]
    else:
        cons = [F @ c == y]
    prob = cp.Problem(cp.Minimize(cp.sum(cp.abs(c))), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-9, tol_gap_rel=1e-9, tol_feas=1e-9)
    if prob.status != cp.OPTIMAL:
        raise RuntimeError(f"reference solver status {prob.status}")
    return np.asarray(c.value), float(prob.value)


def main(outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for seed, D, N, M, sigma, model in INSTANCES:
        gamma = f"range:0:{D - 1}"
        fs = make_frequency_set(1, gamma)
        X = draw_samples(fs, model, N, seed)
        op = MeasurementOperator(fs, X)
        c = draw_sparse_coefficients(fs, M, seed)
        y = op.forward(c.values) + draw_noise_on_sphere(N, sigma, seed)
        ref, val = solve_reference(op.matrix(), y, sigma)
        record = {
            "seed": seed,
            "D": D,
            "N": N,
            "M": M,
            "sigma": sigma,
            "gamma": gamma,
            "model": X.model.to_dict(),
            "points": X.points.tolist(),
            "y": pairs(y),
            "c_true": pairs(c.values),
            "reference_l1": val,
            "reference_solution": pairs(ref),
            "reference_solver": "cvxpy/CLARABEL tol 1e-9",
        }
        path = outdir / f"bpdn_{seed}.json"
        path.write_text(json.dumps(record, indent=1) + "\n")
        print(f"{path}: l1={val:.10f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "bpdn")
