"""Coherence, Gram-submatrix spectra and restricted isometry constants.

All quantities refer to the column-normalised matrix ``N^{-1/2} F``.  The
restricted isometry constant of order ``M`` is

    delta_M = max_{|T| <= M} max(lambda_max(G_T) - 1, 1 - lambda_min(G_T)),
    G_T = N^{-1} F_T^* F_T.

By eigenvalue interlacing the maximum over ``|T| <= M`` is attained at
``|T| = M``, so only subsets of exactly that size are enumerated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import CombinatorialBudgetExceeded, EmptySubset, NeedTwoColumns
from .fourier_ops import MeasurementOperator, difference_set
from .seeding import rng_for

#: Values within this distance of the maximum are treated as ties.
TIE_TOL = 1e-12

_BATCH = 4096


@dataclass(frozen=True)
class CoherenceReport:
    mu: float
    argmax_pair: tuple

    def to_dict(self):
        return {"mu": self.mu, "argmax_pair": list(self.argmax_pair)}


@dataclass(frozen=True)
class RicReport:
    M: int
    delta: float
    method: str
    trials: int | None = None
    witness_subset: tuple | None = None

    def to_dict(self):
        out = asdict(self)
        if self.witness_subset is not None:
            out["witness_subset"] = list(self.witness_subset)
        return out


def _coherence_gram(op):
    G = np.abs(op.gram(np.arange(op.D)))
    iu = np.triu_indices(op.D, k=1)
    vals = G[iu]
    mu = float(vals.max())
    hit = np.flatnonzero(vals >= mu - TIE_TOL)[0]
    # triu_indices enumerates pairs in lexicographic order
    return mu, (int(iu[0][hit]), int(iu[1][hit]))


def _coherence_differences(op):
    fs = op.frequency_set
    if fs.is_contiguous:
        diffs = np.arange(1, fs.D, dtype=np.int64)[:, None]
    else:
        diffs = difference_set(fs)
        # |S(-m)| = |S(m)|: keep the half whose first nonzero entry is positive
        first = diffs[np.arange(diffs.shape[0]), np.argmax(diffs != 0, axis=1)]
        diffs = diffs[first > 0]
    sums = np.zeros(diffs.shape[0])
    step = max(1, (1 << 20) // max(op.N, 1))
    for start in range(0, diffs.shape[0], step):
        block = diffs[start:start + step]
        sums[start:start + step] = np.abs(op._phases(block).sum(axis=0))
    vals = sums / op.N
    mu = float(vals.max())
    cands = diffs[vals >= mu - TIE_TOL]
    if fs.is_contiguous:
        # pair (j, j + m) is smallest at j = 0
        return mu, (0, int(cands[:, 0].min()))
    index = {tuple(f): i for i, f in enumerate(fs.freqs.tolist())}
    shifts = [tuple(s) for s in np.concatenate([cands, -cands]).tolist()]
    for j, f in enumerate(fs.freqs.tolist()):
        ks = [index.get(tuple(a + b for a, b in zip(f, s)), -1) for s in shifts]
        ks = [k for k in ks if k > j]
        if ks:
            return mu, (j, min(ks))
    raise AssertionError("no pair realises the maximal difference")  # pragma: no cover


def coherence(op: MeasurementOperator, method: str = "auto") -> CoherenceReport:
    """Largest normalised inner product between distinct columns.

    Parameters
    ----------
    op : MeasurementOperator
    method : {"auto", "gram", "differences"}
        ``"differences"`` uses that ``<phi_j, phi_k>`` only depends on
        ``j - k`` and costs ``O(D' N)``; ``"auto"`` picks it whenever the
        difference set is smaller than the number of column pairs.

    Returns
    -------
    CoherenceReport
        ``mu`` and the lexicographically smallest index pair attaining it.
    """
    if op.D < 2:
        raise NeedTwoColumns("coherence needs at least two columns")
    if method == "auto":
        fs = op.frequency_set
        n_pairs = op.D * (op.D - 1) // 2
        if fs.is_contiguous:
            method = "differences"
        elif op.D <= 512 and difference_set(fs).shape[0] // 2 < n_pairs:
            method = "differences"
        else:
            method = "gram"
    if method == "gram":
        mu, pair = _coherence_gram(op)
    elif method == "differences":
        mu, pair = _coherence_differences(op)
    else:
        raise ValueError(f"unknown coherence method {method!r}")
    return CoherenceReport(min(mu, 1.0), pair)


def gram_eig_extremes(op: MeasurementOperator, T) -> tuple[float, float]:
    """Smallest and largest eigenvalue of ``N^{-1} F_T^* F_T``."""
    T = np.unique(np.asarray(list(T), dtype=np.int64))
    if T.size == 0:
        raise EmptySubset("subset T is empty")
    if T[0] < 0 or T[-1] >= op.D:
        raise ValueError("subset index out of range")
    w = np.linalg.eigvalsh(op.gram(T))
    return float(max(w[0], 0.0)), float(w[-1])


def _deviation(G, subsets):
    sub = G[subsets[:, :, None], subsets[:, None, :]]
    w = np.linalg.eigvalsh(sub)
    return np.maximum(w[:, -1] - 1.0, 1.0 - w[:, 0])


def _check_order(op, M):
    if not 1 <= M <= op.D:
        raise ValueError(f"subset size M={M} must satisfy 1 <= M <= D={op.D}")


def ric_exhaustive(op: MeasurementOperator, M: int, budget: int = 10**6) -> RicReport:
    """Exact restricted isometry constant by enumerating all ``M``-subsets.

    Raises
    ------
    CombinatorialBudgetExceeded
        More than ``budget`` subsets would be needed; use
        :func:`ric_monte_carlo` instead.
    """
    _check_order(op, M)
    count = math.comb(op.D, M)
    if count > budget:
        raise CombinatorialBudgetExceeded(
            f"C({op.D}, {M}) = {count} subsets exceeds budget {budget}"
        )
    G = op.gram(np.arange(op.D))
    best, witness = -np.inf, None
    combos = itertools.combinations(range(op.D), M)
    while True:
        chunk = list(itertools.islice(combos, _BATCH))
        if not chunk:
            break
        subsets = np.asarray(chunk, dtype=np.int64)
        dev = _deviation(G, subsets)
        i = int(np.argmax(dev))
        if dev[i] > best:
            best, witness = float(dev[i]), tuple(chunk[i])
    return RicReport(M, max(best, 0.0), "exhaustive", None, witness)


def ric_monte_carlo(op: MeasurementOperator, M: int, trials: int, seed: int) -> RicReport:
    """Lower bound for the restricted isometry constant from random subsets.

    Each trial draws a uniformly random permutation and keeps its first
    ``M`` entries, so reports for different ``M`` under the same seed use
    nested subsets.
    """
    _check_order(op, M)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = rng_for(seed, "ric")
    G = op.gram(np.arange(op.D))
    best = 0.0
    done = 0
    while done < trials:
        n = min(_BATCH, trials - done)
        subsets = np.stack([rng.permutation(op.D)[:M] for _ in range(n)])
        best = max(best, float(_deviation(G, subsets).max()))
        done += n
    return RicReport(M, best, "monte_carlo", trials, None)
