"""Closed-form sample-complexity conditions and tail bounds.

All logarithms are natural.  Probability-valued bounds are returned as
:class:`TailBound`, carrying the raw expression (which may exceed 1) next to
the value clamped to ``[0, 1]``.

Constants that only appear as "some absolute constant" are parameters; the
explicit values obtained from the proofs are the defaults where available.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidProbability

#: Constant of the first-step sample condition for OMP, ``16 + 8 / (3 sqrt 2)``.
OMP_FIRST_STEP_CONSTANT = 16.0 + 8.0 / (3.0 * math.sqrt(2.0))
#: Constant of the coherence-based uniform condition, ``4 + 4 / (3 sqrt 2)``.
COHERENCE_CONSTANT = 4.0 + 4.0 / (3.0 * math.sqrt(2.0))
#: Improved coherence constant for continuous sampling.
COHERENCE_CONSTANT_CONTINUOUS = 4.0 / 3.0
#: Bernstein-type denominator coefficient ``4 / (3 sqrt 2)``.
_BERNSTEIN = 4.0 / (3.0 * math.sqrt(2.0))


def talagrand_rate(delta: float) -> float:
    """Exponent rate ``c0(delta)`` in the deviation tail ``2 exp(-c0 N / M)``."""
    c = (math.sqrt(2.0) - 1.0) / 2.0
    return c * delta * math.log(1.0 + 2.0 * math.log(1.0 + c * delta / (delta + 1.0)))


#: ``1 / c0(1)``, approximately 26.84.
RIP_DEVIATION_CONSTANT = 1.0 / talagrand_rate(1.0)


def _probability(name, value):
    if not 0.0 < value < 1.0:
        raise InvalidProbability(f"{name} must lie in (0, 1), got {value}")


@dataclass(frozen=True)
class TailBound:
    raw: float
    value: float

    @classmethod
    def of(cls, raw):
        raw = float(raw)
        return cls(raw, min(max(raw, 0.0), 1.0))

    def to_dict(self):
        return asdict(self)


class _Report:
    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ConditionCheck(_Report):
    lhs: float
    rhs: float
    holds: bool


def c_delta(delta: float) -> float:
    """``(1 - delta^2 / e)^{-1}``."""
    return 1.0 / (1.0 - delta**2 / math.e)


def eigval_condition(N, M, delta, epsilon) -> ConditionCheck:
    """Sample condition for ``1 - delta <= lambda(N^{-1} F_T^* F_T) <= 1 + delta``.

    ``lhs = floor(delta^2 N / (3 e M))`` and ``rhs = ln(c(delta) M / epsilon)``.
    """
    _probability("delta", delta)
    _probability("epsilon", epsilon)
    lhs = math.floor(delta**2 * N / (3.0 * math.e * M))
    rhs = math.log(c_delta(delta) * M / epsilon)
    return ConditionCheck(lhs, rhs, lhs >= rhs)


def omp_correlation_tail(N, t, c_norm2, c_norm1) -> TailBound:
    """Tail of ``|N^{-1} <F_T c, phi_j>|`` for a column ``j`` outside ``T``:

    ``4 exp(-N t^2 / (4 ||c||_2^2 + 4/(3 sqrt 2) ||c||_1 t))``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if c_norm2 < 0 or c_norm1 < 0 or (c_norm2 == 0 and c_norm1 == 0):
        raise ValueError("norms must be non-negative and not both zero")
    denom = 4.0 * c_norm2**2 + _BERNSTEIN * c_norm1 * t
    return TailBound.of(4.0 * math.exp(-N * t**2 / denom))


def optimal_kappa(N, t, grid=4096) -> float:
    """Minimiser of ``exp(-N kappa t^2) / (1 - kappa)`` over a grid in (0, 1)."""
    kappas = (np.arange(1, grid) / grid).astype(float)
    vals = -N * kappas * t**2 - np.log1p(-kappas)
    return float(kappas[int(np.argmin(vals))])


def coherence_tail(N, t, D_prime, model="general", kappa=None) -> TailBound:
    """Upper bound on ``P(mu > t)`` for the normalised sampling matrix.

    Parameters
    ----------
    model : {"general", "continuous"}
        ``"general"`` holds for continuous and grid sampling:
        ``4 D' exp(-N t^2 / (4 + 4/(3 sqrt 2) t))``.  ``"continuous"`` is the
        sharper ``(1 - kappa)^{-1} D' exp(-N kappa t^2)``, with ``kappa``
        chosen by :func:`optimal_kappa` when not given.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if D_prime == 0:
        return TailBound.of(0.0)
    if model == "general":
        return TailBound.of(4.0 * D_prime * math.exp(-N * t**2 / (4.0 + _BERNSTEIN * t)))
    if model == "continuous":
        if kappa is None:
            kappa = optimal_kappa(N, t)
        if not 0.0 < kappa < 1.0:
            raise ValueError("kappa must lie in (0, 1)")
        return TailBound.of(D_prime * math.exp(-N * kappa * t**2) / (1.0 - kappa))
    raise ValueError(f"unknown model {model!r}")


@dataclass(frozen=True)
class OmpFirstStepReport(_Report):
    samples_threshold: float
    samples_ok: bool
    eig_lhs: int
    eig_rhs: float
    eig_ok: bool
    noise_threshold: float
    noise_ok: bool
    noise_min_threshold: float | None
    noise_min_ok: bool | None
    all_hold: bool
    guarantee: str


def omp_first_step_conditions(
    N, M, D, tau, epsilon, sigma, c_norm2, min_coeff=None, C=OMP_FIRST_STEP_CONSTANT
) -> OmpFirstStepReport:
    """Conditions under which OMP's first pick lies in the true support w.p. ``>= 1 - epsilon``.

    Checks ``N >= C M tau^-2 ln(8 D / epsilon)``,
    ``floor(N / (12 e M)) >= ln(2 (1 - 1/(4e))^-1 M / epsilon)`` and the noise
    level ``sigma <= (1 - tau)/4 sqrt(N / M) ||c||_2``; with ``min_coeff`` also
    the coefficient-wise form ``sigma <= (1 - tau)/4 sqrt(N) min|c_j|``.
    """
    _probability("tau", tau)
    _probability("epsilon", epsilon)
    threshold = C * M * tau**-2 * math.log(8.0 * D / epsilon)
    eig_lhs = math.floor(N / (12.0 * math.e * M))
    eig_rhs = math.log(2.0 / (1.0 - 1.0 / (4.0 * math.e)) * M / epsilon)
    noise_threshold = (1.0 - tau) / 4.0 * math.sqrt(N / M) * c_norm2
    noise_ok = sigma <= noise_threshold
    nm_threshold = nm_ok = None
    if min_coeff is not None:
        nm_threshold = (1.0 - tau) / 4.0 * math.sqrt(N) * min_coeff
        nm_ok = sigma <= nm_threshold
    samples_ok = N >= threshold
    eig_ok = eig_lhs >= eig_rhs
    all_hold = samples_ok and eig_ok and noise_ok
    return OmpFirstStepReport(
        threshold,
        samples_ok,
        eig_lhs,
        eig_rhs,
        eig_ok,
        noise_threshold,
        noise_ok,
        nm_threshold,
        nm_ok,
        all_hold,
        f"first OMP pick lies in the true support with probability >= {1 - epsilon:g}"
        if all_hold
        else "conditions not met; no guarantee",
    )


@dataclass(frozen=True)
class UniformOmpReport(_Report):
    samples_threshold: float
    samples_ok: bool
    coeff_threshold: float
    coeff_ok: bool
    error_bound: float


def uniform_omp_conditions(
    N, M, D_prime, tau, epsilon, sigma, min_coeff, C=COHERENCE_CONSTANT
) -> UniformOmpReport:
    """Uniform recovery conditions for OMP stopped at residual ``<= sigma``.

    Sample condition ``N >= C tau^-2 (2M - 1)^2 ln(4 D' / epsilon)``,
    coefficient condition ``min|c_k| > 2 sigma / ((1 - tau) sqrt N)`` and the
    resulting error bound ``sigma / sqrt(N (1 - tau / 2))``.
    """
    _probability("tau", tau)
    _probability("epsilon", epsilon)
    threshold = C * tau**-2 * (2 * M - 1) ** 2 * math.log(4.0 * max(D_prime, 1) / epsilon)
    coeff_threshold = 2.0 * sigma / ((1.0 - tau) * math.sqrt(N))
    return UniformOmpReport(
        threshold,
        N >= threshold,
        coeff_threshold,
        min_coeff > coeff_threshold,
        sigma / math.sqrt(N * (1.0 - tau / 2.0)),
    )


@dataclass(frozen=True)
class CoherenceGuaranteeReport(_Report):
    coherence_ok: bool
    noise_threshold: float
    noise_ok: bool
    error_bound: float | None
    error_bound_status: str


def dete_guarantee(mu, M, sigma, min_coeff) -> CoherenceGuaranteeReport:
    """Coherence-based OMP guarantee.

    Needs ``(2M - 1) mu < 1`` and
    ``sigma < (1 - (2M - 1) mu) / 2 * min|c_k|``; then the error is at most
    ``sigma / sqrt(1 - (M - 1) mu)``.  The error bound is reported as
    ``None`` ("NotApplicable") when ``(M - 1) mu >= 1``.
    """
    if not 0.0 <= mu <= 1.0:
        raise ValueError("mu must lie in [0, 1]")
    if M < 1:
        raise ValueError("M must be at least 1")
    slack = 1.0 - (2 * M - 1) * mu
    noise_threshold = slack / 2.0 * min_coeff
    if (M - 1) * mu >= 1.0:
        err, status = None, "NotApplicable"
    else:
        err, status = sigma / math.sqrt(1.0 - (M - 1) * mu), "ok"
    return CoherenceGuaranteeReport(slack > 0, noise_threshold, sigma < noise_threshold, err, status)


@dataclass(frozen=True)
class RipSampleReport(_Report):
    lhs: float
    rhs_unit: float
    C: float | None
    holds: bool | None


def rip_sample_condition(N, M, D, delta, epsilon, C=None) -> RipSampleReport:
    """``N / ln N`` against ``delta^-2 M ln^2(M) ln(D) ln(1/epsilon)``.

    ``holds`` compares ``lhs >= C * rhs_unit`` when ``C`` is given.  For
    ``M = 1`` the restricted isometry constant is exactly zero and ``holds``
    is True.
    """
    _probability("delta", delta)
    _probability("epsilon", epsilon)
    if N < 2:
        raise ValueError("N must be at least 2")
    lhs = N / math.log(N)
    rhs = delta**-2 * M * math.log(M) ** 2 * math.log(D) * math.log(1.0 / epsilon)
    if M == 1:
        return RipSampleReport(lhs, rhs, C, True)
    holds = None if C is None else lhs >= C * rhs
    return RipSampleReport(lhs, rhs, C, holds)
