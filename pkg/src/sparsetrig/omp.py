"""Orthogonal Matching Pursuit for sparse trigonometric polynomials.

Each iteration correlates the residual with every column (one adjoint
application), adds the best column to the active set and projects the
samples onto the span of the active columns.  The projection is kept as a
QR factorisation that grows by one column per iteration.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import EmptyInput, InvalidConfig, RankDeficient, ShapeError
from .fourier_ops import MeasurementOperator, SparseCoefficients

#: Largest acceptable condition number of the active column block.
MAX_CONDITION = 1e12
#: Relative correlation below which the iteration is declared stalled.
STALL_TOL = 1e-12


class Status(str, enum.Enum):
    HIT_SPARSITY = "HitSparsity"
    HIT_TOLERANCE = "HitTolerance"
    STALLED = "Stalled"


@dataclass(frozen=True)
class OmpConfig:
    """Stopping rules: at most ``max_sparsity`` atoms and/or residual norm ``<= residual_tol``."""

    max_sparsity: int | None = None
    residual_tol: float | None = None
    tie_break: str = "lowest-index"

    def __post_init__(self):
        if self.max_sparsity is None and self.residual_tol is None:
            raise InvalidConfig("set max_sparsity, residual_tol, or both")
        if self.max_sparsity is not None and self.max_sparsity < 1:
            raise InvalidConfig("max_sparsity must be positive")
        if self.residual_tol is not None and self.residual_tol < 0:
            raise InvalidConfig("residual_tol must be non-negative")
        if self.tie_break != "lowest-index":
            raise InvalidConfig(f"unsupported tie_break {self.tie_break!r}")


@dataclass(frozen=True)
class RecoveryResult:
    coefficients: SparseCoefficients
    support_order: tuple
    residual_norm: float
    iterations: int
    status: Status
    residual_history: tuple = ()
    reselections: int = 0
    condition: float = 1.0

    def to_dict(self):
        vals = self.coefficients.values[list(self.support_order)]
        return {
            "support_order": list(self.support_order),
            "values": [[float(v.real), float(v.imag)] for v in vals],
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "status": self.status.value,
        }


class IncrementalQR:
    """Thin QR factorisation ``A = Q R`` grown one column at a time.

    Columns are orthogonalised with two passes of classical Gram-Schmidt,
    which keeps ``Q`` orthonormal to working precision.
    """

    def __init__(self, n_rows):
        self.n_rows = n_rows
        self._Q = np.zeros((n_rows, 0), dtype=complex)
        self._R = np.zeros((0, 0), dtype=complex)

    @property
    def Q(self):
        return self._Q

    @property
    def R(self):
        return self._R

    @property
    def n_cols(self):
        return self._Q.shape[1]

    def append(self, a):
        a = np.asarray(a, dtype=complex)
        s = self.n_cols
        coef = np.zeros(s, dtype=complex)
        v = a.copy()
        for _ in range(2):
            h = self._Q.conj().T @ v
            v -= self._Q @ h
            coef += h
        rho = np.linalg.norm(v)
        R = np.zeros((s + 1, s + 1), dtype=complex)
        R[:s, :s] = self._R
        R[:s, s] = coef
        R[s, s] = rho
        q = v / rho if rho > 0 else v
        self._Q = np.column_stack([self._Q, q])
        self._R = R

    def condition(self):
        if self.n_cols == 0:
            return 1.0
        sv = np.linalg.svd(self._R, compute_uv=False)
        return float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf

    def solve(self, y):
        """Least-squares coefficients and the projection residual for ``y``."""
        qy = self._Q.conj().T @ y
        coef = solve_triangular(self._R, qy, lower=False)
        resid = y - self._Q @ qy
        # one refinement pass removes the component re-introduced by rounding
        resid -= self._Q @ (self._Q.conj().T @ resid)
        return coef, resid


def _build_result(D, order, coef, rnorm, status, history, reselections, cond):
    vals = np.zeros(D, dtype=complex)
    if order:
        vals[list(order)] = coef
    return RecoveryResult(
        SparseCoefficients(vals, tuple(order)),
        tuple(order),
        float(rnorm),
        len(order),
        status,
        tuple(history),
        reselections,
        cond,
    )


def omp_recover(op: MeasurementOperator, y, cfg: OmpConfig) -> RecoveryResult:
    """Greedy sparse recovery of the coefficient vector from samples ``y``.

    Parameters
    ----------
    op : MeasurementOperator
    y : array_like, shape (N,)
        Observed (possibly noisy) samples.
    cfg : OmpConfig
        The loop stops after ``max_sparsity`` atoms or once the residual
        norm drops to ``residual_tol``, whichever comes first.

    Returns
    -------
    RecoveryResult

    Raises
    ------
    EmptyInput
        No samples.
    RankDeficient
        The active columns became numerically dependent; the result up to
        the previous iteration is attached as ``exc.partial``.
    """
    if op.N == 0:
        raise EmptyInput("no samples to recover from")
    y = np.asarray(y)
    if y.shape != (op.N,):
        raise ShapeError(f"samples must have shape ({op.N},), got {y.shape}")
    y = y.astype(complex)
    limit = cfg.max_sparsity if cfg.max_sparsity is not None else min(op.N, op.D)
    tol = cfg.residual_tol

    qr = IncrementalQR(op.N)
    order: list[int] = []
    selected = np.zeros(op.D, dtype=bool)
    coef = np.zeros(0, dtype=complex)
    r = y.copy()
    rnorm = float(np.linalg.norm(r))
    history = [rnorm]
    reselections = 0
    cond = 1.0
    sqrt_n = np.sqrt(op.N)
    status = Status.HIT_SPARSITY

    while True:
        corr = np.abs(op.adjoint(r))
        k = int(np.argmax(corr))
        if selected[k]:
            reselections += 1
            masked = np.where(selected, -np.inf, corr)
            k = int(np.argmax(masked))
            if selected[k]:
                status = Status.STALLED
                break
        if corr[k] <= STALL_TOL * sqrt_n * rnorm:
            status = Status.STALLED
            break
        qr.append(op.column(k))
        new_cond = qr.condition()
        if not new_cond <= MAX_CONDITION:
            partial = _build_result(op.D, order, coef, rnorm, Status.STALLED, history, reselections, cond)
            raise RankDeficient(
                f"condition estimate {new_cond:.3g} exceeds {MAX_CONDITION:g} after adding column {k}",
                partial=partial,
            )
        cond = new_cond
        order.append(k)
        selected[k] = True
        coef, r = qr.solve(y)
        rnorm = float(np.linalg.norm(r))
        history.append(rnorm)
        if tol is not None and rnorm <= tol:
            status = Status.HIT_TOLERANCE
            break
        if len(order) >= limit:
            status = Status.HIT_SPARSITY
            break
        if len(order) >= op.N:
            status = Status.STALLED
            break
    return _build_result(op.D, order, coef, rnorm, status, history, reselections, cond)


def support_match(true_support, recovered) -> bool:
    """Exact set equality between the true support and the recovered one."""
    if isinstance(recovered, RecoveryResult):
        recovered = recovered.support_order
    return set(int(k) for k in true_support) == set(int(k) for k in recovered)


def residual_certificate(op: MeasurementOperator, y, result) -> float:
    """Recompute ``||y - F c||_2`` from scratch for a recovery result."""
    coeffs = result.coefficients if isinstance(result, RecoveryResult) else result
    values = coeffs.values if isinstance(coeffs, SparseCoefficients) else np.asarray(coeffs)
    return float(np.linalg.norm(np.asarray(y, dtype=complex) - op.forward(values)))
