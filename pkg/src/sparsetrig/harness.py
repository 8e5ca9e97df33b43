"""Monte-Carlo recovery experiments.

A sweep varies either the sparsity ``M`` or the noise level ``sigma``.  Each
trial draws a random sparse coefficient vector, a sampling set and a noise
vector on the sphere, then runs every configured method on the identical
instance.  Per-trial seeds depend only on ``(master_seed, trial_index)`` and
a purpose tag, so results do not depend on scheduling or thread count.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .bpdn import BpdnConfig, bpdn_solve
from .errors import InvalidConfig, RankDeficient
from .fourier_ops import (
    ContinuousUniform,
    GridSubset,
    MeasurementOperator,
    draw_noise_on_sphere,
    draw_samples,
    draw_sparse_coefficients,
    make_frequency_set,
    parse_model,
)
from .omp import OmpConfig, Status, omp_recover
from .seeding import derive_seed

#: Environment variable holding the default worker count.
THREADS_ENV = "SPARSETRIG_THREADS"

CSV_COLUMNS = (
    "sweep_var",
    "sweep_value",
    "method",
    "model",
    "trials",
    "success_rate",
    "mean_l2_error",
    "mean_sample_norm",
)

_METHODS = ("OMP", "BPDN")


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep description.

    Parameters
    ----------
    d : int
        Spatial dimension.
    gamma : str or list, optional
        Frequency set descriptor (see :func:`make_frequency_set`); defaults
        to the symmetric set of size ``D``.
    D : int, optional
        Size of the default frequency set.
    N : int
        Number of samples.
    sigma, M : float, int
        Fixed noise level and sparsity; the swept one is overridden.
    sweep_var : {"M", "sigma"}
    sweep_values : list
    models : list of str
        ``"FFT"`` is a random grid subset of size ``N`` on ``q`` points per
        axis, ``"NFFT"`` is continuous uniform sampling; any model string
        accepted by :func:`parse_model` also works.
    methods : list of {"OMP", "BPDN"}
    q : int, optional
        Grid size for ``"FFT"``; defaults to ``D``.
    support_threshold : float
        Relative threshold for reading a support off a BPDN solution.
    noise_floor : bool
        Also require ``|c_k| > sigma / sqrt(N)`` in the BPDN support.
    bpdn : dict
        Overrides for :class:`BpdnConfig` (``sigma`` is set per trial).
    """

    N: int
    d: int = 1
    D: int | None = None
    gamma: object = None
    sigma: float = 0.0
    M: int = 1
    trials: int = 100
    sweep_var: str = "M"
    sweep_values: tuple = (1,)
    models: tuple = ("FFT", "NFFT")
    methods: tuple = _METHODS
    master_seed: int = 0
    q: int | None = None
    support_threshold: float = 1e-3
    noise_floor: bool = True
    bpdn: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("sweep_values", "models", "methods"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if isinstance(self.gamma, list):
            object.__setattr__(self, "gamma", tuple(tuple(k) if isinstance(k, list) else k for k in self.gamma))
        if self.gamma is None and self.D is None:
            raise InvalidConfig("give either D or gamma")
        if self.trials < 1:
            raise InvalidConfig("trials must be at least 1")
        if self.N < 1:
            raise InvalidConfig("N must be at least 1")
        if self.sweep_var not in ("M", "sigma"):
            raise InvalidConfig(f"sweep_var must be 'M' or 'sigma', got {self.sweep_var!r}")
        if self.sweep_var == "M" and any(int(v) != v or v < 1 for v in self.sweep_values):
            raise InvalidConfig("sparsity sweep values must be positive integers")
        if self.sweep_var == "sigma" and any(v < 0 for v in self.sweep_values):
            raise InvalidConfig("noise sweep values must be non-negative")
        if not self.methods or any(m not in _METHODS for m in self.methods):
            raise InvalidConfig(f"methods must be a non-empty subset of {_METHODS}")
        if not self.models:
            raise InvalidConfig("models must be non-empty")
        if self.sigma < 0:
            raise InvalidConfig("sigma must be non-negative")
        BpdnConfig(**self.bpdn)

    def frequency_set(self):
        spec = self.gamma if self.gamma is not None else f"symmetric:{self.D}"
        if isinstance(spec, tuple) and not isinstance(spec[0], str):
            spec = list(spec)
        return make_frequency_set(self.d, spec)

    def sampling_model(self, label):
        if label == "FFT":
            return GridSubset(self.q or self.frequency_set().D)
        if label == "NFFT":
            return ContinuousUniform()
        return parse_model(label)

    def point(self, value):
        """``(M, sigma)`` at a sweep value."""
        if self.sweep_var == "M":
            return int(value), float(self.sigma)
        return int(self.M), float(value)

    def to_dict(self):
        out = asdict(self)
        for name in ("sweep_values", "models", "methods"):
            out[name] = list(out[name])
        if isinstance(self.gamma, tuple):
            out["gamma"] = [list(k) if isinstance(k, tuple) else k for k in self.gamma]
        return out

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise InvalidConfig(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    sweep_var: str
    sweep_value: float
    M: int
    sigma: float
    method: str
    model: str
    support_recovered: bool
    l2_error: float
    residual_norm: float
    seed: int
    instance_hash: str
    converged: bool
    lambda_min: float
    sample_norm: float
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class AggregateRow:
    sweep_var: str
    sweep_value: float
    method: str
    model: str
    trials: int
    success_rate: float
    mean_l2_error: float
    mean_sample_norm: float

    def to_dict(self):
        return asdict(self)


@dataclass
class AggregateStats:
    rows: list
    records: list = field(default_factory=list)

    def row(self, sweep_value, method, model):
        for r in self.rows:
            if r.sweep_value == sweep_value and r.method == method and r.model == model:
                return r
        raise KeyError((sweep_value, method, model))

    def series(self, method, model, attr):
        rows = [r for r in self.rows if r.method == method and r.model == model]
        return [getattr(r, attr) for r in sorted(rows, key=lambda r: r.sweep_value)]


def trial_seed(master_seed, trial_index):
    return derive_seed(master_seed, "trial", trial_index)


def instance_hash(c, points, noise):
    h = hashlib.sha256()
    for a in (c, points, noise):
        h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()


def bpdn_support(c_hat, sigma, N, rel=1e-3, noise_floor=True):
    """Indices of a BPDN solution treated as nonzero.

    Entries must exceed ``rel * max|c|`` and, with ``noise_floor``, also
    ``sigma / sqrt(N)``, the per-coefficient scale of the noise.
    """
    mag = np.abs(c_hat)
    if mag.size == 0 or mag.max() == 0:
        return np.zeros(0, dtype=np.int64)
    thr = rel * mag.max()
    if noise_floor:
        thr = max(thr, sigma / np.sqrt(N))
    return np.flatnonzero(mag > thr)


def _solve(method, op, y, M, sigma, cfg):
    """Run one method; returns (estimate, support, residual, converged)."""
    if method == "OMP":
        try:
            res = omp_recover(op, y, OmpConfig(max_sparsity=M))
            ok = res.status == Status.HIT_SPARSITY
        except RankDeficient as exc:
            res, ok = exc.partial, False
        return res.coefficients.values, np.asarray(res.support_order), res.residual_norm, ok
    res = bpdn_solve(op, y, BpdnConfig(**{**cfg.bpdn, "sigma": sigma}))
    supp = bpdn_support(res.coefficients, sigma, op.N, cfg.support_threshold, cfg.noise_floor)
    rnorm = float(np.linalg.norm(y - op.forward(res.coefficients)))
    return res.coefficients, supp, rnorm, res.converged


def run_trial(cfg: ExperimentConfig, sweep_value, trial_index: int) -> list[TrialRecord]:
    """All methods and models on one random instance.

    Within a model every method sees the same ``(c, X, eta)``; the hash of
    that triple is stored in each record.  OMP always runs exactly ``M``
    iterations and BPDN uses the true noise level as its radius.
    """
    M, sigma = cfg.point(sweep_value)
    fs = cfg.frequency_set()
    seed = trial_seed(cfg.master_seed, trial_index)
    c = draw_sparse_coefficients(fs, M, seed)
    noise = draw_noise_on_sphere(cfg.N, sigma, seed)
    T = np.asarray(c.support)
    out = []
    for label in cfg.models:
        X = draw_samples(fs, cfg.sampling_model(label), cfg.N, seed)
        op = MeasurementOperator(fs, X)
        clean = op.forward(c.values)
        y = clean + noise
        lam = float(max(np.linalg.eigvalsh(op.gram(T))[0], 0.0))
        h = instance_hash(c.values, X.points, noise)
        for method in cfg.methods:
            t0 = time.perf_counter()
            est, supp, rnorm, ok = _solve(method, op, y, M, sigma, cfg)
            wall = time.perf_counter() - t0
            out.append(
                TrialRecord(
                    trial_index=trial_index,
                    sweep_var=cfg.sweep_var,
                    sweep_value=float(sweep_value),
                    M=M,
                    sigma=sigma,
                    method=method,
                    model=str(label),
                    support_recovered=set(supp.tolist()) == set(T.tolist()),
                    l2_error=float(np.linalg.norm(est - c.values)),
                    residual_norm=float(rnorm),
                    seed=seed,
                    instance_hash=h,
                    converged=bool(ok),
                    lambda_min=lam,
                    sample_norm=float(np.linalg.norm(clean)),
                    wall_time=wall,
                )
            )
    return out


def _run_unit(args):
    cfg, value, index = args
    return run_trial(cfg, value, index)


def default_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def aggregate(cfg: ExperimentConfig, records) -> AggregateStats:
    """Deterministic per-(sweep point, method, model) reduction."""
    records = sorted(records, key=lambda r: (r.sweep_value, r.trial_index, r.model, r.method))
    groups: dict = {}
    for r in records:
        groups.setdefault((r.sweep_value, r.method, r.model), []).append(r)
    rows = []
    for value in cfg.sweep_values:
        for model in cfg.models:
            for method in cfg.methods:
                g = groups.get((float(value), method, str(model)), [])
                n = len(g)
                rows.append(
                    AggregateRow(
                        cfg.sweep_var,
                        float(value),
                        method,
                        str(model),
                        n,
                        sum(r.support_recovered for r in g) / n if n else 0.0,
                        float(np.mean([r.l2_error for r in g])) if n else 0.0,
                        float(np.mean([r.sample_norm for r in g])) if n else 0.0,
                    )
                )
    return AggregateStats(rows, records)


def run_sweep(cfg: ExperimentConfig, threads: int | None = None) -> AggregateStats:
    """Run ``trials`` trials at every sweep value and aggregate them."""
    threads = default_threads() if threads is None else max(1, int(threads))
    units = [(cfg, v, i) for v in cfg.sweep_values for i in range(cfg.trials)]
    records = []
    if threads == 1:
        for u in units:
            records.extend(_run_unit(u))
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for recs in pool.map(_run_unit, units, chunksize=max(1, len(units) // (4 * threads))):
                records.extend(recs)
    return aggregate(cfg, records)


def emit(stats: AggregateStats, fmt: str, path, include_records: bool = False):
    """Write aggregate rows as CSV or JSON.

    Raises
    ------
    OSError
        The path cannot be written; the message names the path.
    """
    path = Path(path)
    try:
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(CSV_COLUMNS)
                for r in stats.rows:
                    w.writerow([getattr(r, k) for k in CSV_COLUMNS])
        elif fmt == "json":
            doc = {"columns": list(CSV_COLUMNS), "rows": [r.to_dict() for r in stats.rows]}
            if include_records:
                doc["records"] = [r.to_dict() for r in stats.records]
            path.write_text(json.dumps(doc, indent=1) + "\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _row_from_strings(d):
    return AggregateRow(
        d["sweep_var"],
        float(d["sweep_value"]),
        d["method"],
        d["model"],
        int(d["trials"]),
        float(d["success_rate"]),
        float(d["mean_l2_error"]),
        float(d["mean_sample_norm"]),
    )


def load_stats(path) -> AggregateStats:
    """Inverse of :func:`emit` (format taken from the file suffix)."""
    path = Path(path)
    if path.suffix == ".csv":
        with open(path, newline="") as fh:
            return AggregateStats([_row_from_strings(d) for d in csv.DictReader(fh)])
    doc = json.loads(path.read_text())
    records = [TrialRecord(**r) for r in doc.get("records", [])]
    return AggregateStats([_row_from_strings(d) for d in doc["rows"]], records)
