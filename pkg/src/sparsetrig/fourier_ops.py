"""Frequency sets, random sampling sets and the Fourier measurement operator.

A trigonometric polynomial with frequencies in a finite set ``Gamma`` of
integer vectors is evaluated at sampling points ``x_1, ..., x_N`` through
the ``N x D`` matrix with entries ``exp(i k . x_j)``.  The
:class:`MeasurementOperator` applies that matrix and its adjoint, either from
a stored dense copy, by direct chunked evaluation, or (one-dimensional grids
with contiguous frequencies) through a length-``q`` FFT.

On a grid with spacing ``2 pi / q`` the frequencies ``k`` and ``k mod q`` give
identical samples.  Frequencies are therefore kept exactly as supplied and
grid models only require ``Gamma`` to be injective modulo ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Sequence, Union

import numpy as np

from .errors import (
    GridAliasingError,
    InsufficientGridPoints,
    InvalidFrequencySet,
    InvalidSparsity,
    ShapeError,
)
from .seeding import rng_for

TWO_PI = 2.0 * np.pi

#: Dense storage is used when ``N * D`` does not exceed this many entries.
DENSE_THRESHOLD = 2**22


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# Frequency sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FrequencySet:
    """Finite set of integer frequency vectors in lexicographic order.

    Parameters
    ----------
    freqs : array_like of int, shape (D, d) or (D,)
        Distinct frequency vectors.  A one-dimensional input is read as
        ``d = 1``.
    """

    freqs: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freqs)
        if f.size == 0:
            raise InvalidFrequencySet("frequency set is empty")
        if f.ndim == 1:
            f = f[:, None]
        if f.ndim != 2:
            raise InvalidFrequencySet(f"frequencies must be a (D, d) array, got shape {f.shape}")
        if not np.issubdtype(f.dtype, np.integer):
            if not np.all(np.equal(np.round(f), f)):
                raise InvalidFrequencySet("frequencies must be integer vectors")
        f = f.astype(np.int64)
        order = np.lexsort(f.T[::-1])
        f = f[order]
        if f.shape[0] > 1 and np.any(np.all(f[1:] == f[:-1], axis=1)):
            raise InvalidFrequencySet("frequencies must be distinct")
        object.__setattr__(self, "freqs", _readonly(f))

    @property
    def d(self) -> int:
        return int(self.freqs.shape[1])

    @property
    def D(self) -> int:
        return int(self.freqs.shape[0])

    def __len__(self):
        return self.D

    @property
    def is_contiguous(self) -> bool:
        """True for a one-dimensional set of consecutive integers."""
        if self.d != 1:
            return False
        f = self.freqs[:, 0]
        return bool(f[-1] - f[0] == self.D - 1)

    def index_of(self, k) -> int:
        """Column index of frequency ``k``."""
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        hits = np.flatnonzero(np.all(self.freqs == k, axis=1))
        if hits.size == 0:
            raise KeyError(tuple(k.tolist()))
        return int(hits[0])

    def check_grid(self, q: int) -> None:
        """Raise :class:`GridAliasingError` unless the set is injective modulo ``q``."""
        reduced = np.mod(self.freqs, q)
        if np.unique(reduced, axis=0).shape[0] != self.D:
            raise GridAliasingError(
                f"frequency set of size {self.D} is not injective modulo q={q}; "
                "grid samples cannot distinguish some columns"
            )

    def __eq__(self, other):
        if not isinstance(other, FrequencySet):
            return NotImplemented
        return self.freqs.shape == other.freqs.shape and bool(np.all(self.freqs == other.freqs))

    def __hash__(self):
        return hash(self.freqs.tobytes())

    def to_dict(self):
        return {"d": self.d, "freqs": self.freqs.tolist()}

    @classmethod
    def from_dict(cls, data):
        freqs = np.asarray(data["freqs"], dtype=np.int64).reshape(-1, int(data["d"]))
        return cls(freqs)


def _axis_values(kind, args, d):
    if kind == "symmetric":
        (D,) = args
        if D < 1:
            return np.array([], dtype=np.int64)
        return np.arange(-(D // 2) + 1, D - D // 2 + 1, dtype=np.int64)
    if kind == "range":
        lo, hi = args
        return np.arange(lo, hi + 1, dtype=np.int64)
    if kind == "box":
        (q,) = args
        return np.arange(0, q, dtype=np.int64)
    if kind == "cube":
        (q,) = args
        return np.arange(-q, q + 1, dtype=np.int64)
    raise InvalidFrequencySet(f"unknown frequency descriptor {kind!r}")


def make_frequency_set(d: int, spec) -> FrequencySet:
    """Build a frequency set from a descriptor.

    Parameters
    ----------
    d : int
        Spatial dimension.
    spec : str, tuple or sequence of integer vectors
        One of

        * ``"symmetric:D"`` -- ``{-D/2+1, ..., D/2}`` per axis,
        * ``"range:lo:hi"`` -- ``{lo, ..., hi}`` per axis (inclusive),
        * ``"box:q"`` -- ``{0, ..., q-1}`` per axis,
        * ``"cube:q"`` -- ``{-q, ..., q}`` per axis,

        the same as a tuple such as ``("symmetric", 256)``, or an explicit
        list of frequency vectors.

    Returns
    -------
    FrequencySet
    """
    if d < 1:
        raise InvalidFrequencySet(f"dimension must be positive, got {d}")
    if isinstance(spec, str):
        parts = spec.split(":")
        try:
            spec = (parts[0],) + tuple(int(p) for p in parts[1:])
        except ValueError as exc:
            raise InvalidFrequencySet(f"cannot parse frequency descriptor {spec!r}") from exc
    if isinstance(spec, tuple) and spec and isinstance(spec[0], str):
        kind, args = spec[0], spec[1:]
        expected = 2 if kind == "range" else 1
        if len(args) != expected:
            raise InvalidFrequencySet(f"descriptor {kind!r} takes {expected} integer argument(s)")
        axis = _axis_values(kind, args, d)
        if axis.size == 0:
            raise InvalidFrequencySet(f"descriptor {spec!r} yields no frequencies")
        grids = np.meshgrid(*([axis] * d), indexing="ij")
        freqs = np.stack([g.ravel() for g in grids], axis=1)
        return FrequencySet(freqs)
    freqs = np.asarray(spec, dtype=np.int64)
    if freqs.size == 0:
        raise InvalidFrequencySet("explicit frequency list is empty")
    freqs = freqs.reshape(-1, d)
    return FrequencySet(freqs)


def compute_D_prime(fs: FrequencySet) -> int:
    """Number of distinct nonzero differences ``j - k`` with ``j, k`` in the set."""
    if fs.D < 2:
        return 0
    if fs.is_contiguous:
        return 2 * (fs.D - 1)
    return difference_set(fs).shape[0]


def difference_set(fs: FrequencySet) -> np.ndarray:
    """Distinct nonzero differences, shape (D', d), lexicographically sorted."""
    f = fs.freqs
    diffs = (f[:, None, :] - f[None, :, :]).reshape(-1, fs.d)
    diffs = np.unique(diffs, axis=0)
    return diffs[np.any(diffs != 0, axis=1)]


# ---------------------------------------------------------------------------
# Sampling models and sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuousUniform:
    """I.i.d. points, uniform on ``[0, 2 pi)^d``."""

    kind: ClassVar[str] = "continuous"
    q: ClassVar[None] = None

    def to_dict(self):
        return {"kind": self.kind}

    def __str__(self):
        return "continuous"


@dataclass(frozen=True)
class GridWithReplacement:
    """I.i.d. points, uniform on the grid ``(2 pi / q) {0, ..., q-1}^d``; repeats allowed."""

    q: int
    kind: ClassVar[str] = "grid"

    def to_dict(self):
        return {"kind": self.kind, "q": self.q}

    def __str__(self):
        return f"grid:{self.q}"


@dataclass(frozen=True)
class GridSubset:
    """A uniformly random ``N``-subset of the grid (no repeated points)."""

    q: int
    kind: ClassVar[str] = "subset"

    def to_dict(self):
        return {"kind": self.kind, "q": self.q}

    def __str__(self):
        return f"subset:{self.q}"


SamplingModel = Union[ContinuousUniform, GridWithReplacement, GridSubset]


def parse_model(spec) -> SamplingModel:
    """Parse ``"continuous"``, ``"grid:q"``, ``"subset:q"`` or the matching dict."""
    if isinstance(spec, (ContinuousUniform, GridWithReplacement, GridSubset)):
        return spec
    if isinstance(spec, dict):
        kind, q = spec.get("kind"), spec.get("q")
    else:
        kind, _, q = str(spec).partition(":")
        q = int(q) if q else None
    if kind == "continuous":
        return ContinuousUniform()
    if kind in ("grid", "subset"):
        if q is None or int(q) < 1:
            raise ValueError(f"grid model {kind!r} needs a positive grid size q")
        return GridWithReplacement(int(q)) if kind == "grid" else GridSubset(int(q))
    raise ValueError(f"unknown sampling model {spec!r}")


@dataclass(frozen=True, eq=False)
class SamplingSet:
    """Sampling points in ``[0, 2 pi)^d`` together with the model that drew them.

    For grid models ``grid_indices`` holds the integer grid coordinates ``m``
    with ``points = 2 pi m / q``.
    """

    points: np.ndarray
    model: SamplingModel
    seed: int | None = None
    grid_indices: np.ndarray | None = field(default=None)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ShapeError(f"points must be an (N, d) array, got shape {pts.shape}")
        if np.any(pts < 0) or np.any(pts >= TWO_PI):
            raise ValueError("sampling points must lie in [0, 2 pi)")
        gi = self.grid_indices
        if self.model.q is not None:
            q = self.model.q
            if gi is None:
                gi = np.rint(pts * q / TWO_PI).astype(np.int64)
                if not np.allclose(gi * TWO_PI / q, pts, rtol=0, atol=1e-12):
                    raise ValueError(f"points are not on the grid with q={q}")
            gi = np.asarray(gi, dtype=np.int64).reshape(pts.shape)
            if np.any(gi < 0) or np.any(gi >= q):
                raise ValueError("grid indices out of range")
            if isinstance(self.model, GridSubset):
                if np.unique(gi, axis=0).shape[0] != gi.shape[0]:
                    raise ValueError("grid-subset sampling set has repeated points")
            object.__setattr__(self, "grid_indices", _readonly(gi))
        else:
            object.__setattr__(self, "grid_indices", None)
        object.__setattr__(self, "points", _readonly(pts))

    @property
    def N(self) -> int:
        return int(self.points.shape[0])

    @property
    def d(self) -> int:
        return int(self.points.shape[1])

    def to_dict(self):
        return {
            "d": self.d,
            "points": self.points.tolist(),
            "model": self.model.to_dict(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data):
        pts = np.asarray(data["points"], dtype=float).reshape(-1, int(data["d"]))
        return cls(pts, parse_model(data["model"]), data.get("seed"))


def draw_samples(fs: FrequencySet, model, N: int, seed: int) -> SamplingSet:
    """Draw ``N`` sampling points according to ``model``.

    Raises
    ------
    InsufficientGridPoints
        ``GridSubset`` asked for more points than the grid has.
    GridAliasingError
        The frequency set is not injective modulo the grid size.
    """
    model = parse_model(model)
    if N < 0:
        raise ValueError("N must be non-negative")
    d = fs.d
    rng = rng_for(seed, "points")
    if isinstance(model, ContinuousUniform):
        pts = rng.random((N, d)) * TWO_PI
        pts[pts >= TWO_PI] = 0.0
        return SamplingSet(pts, model, seed)
    q = model.q
    fs.check_grid(q)
    if isinstance(model, GridWithReplacement):
        gi = rng.integers(0, q, size=(N, d))
    else:
        total = q**d
        if N > total:
            raise InsufficientGridPoints(f"cannot draw {N} distinct points from a grid of {total}")
        flat = rng.choice(total, size=N, replace=False)
        gi = np.stack(np.unravel_index(flat, (q,) * d), axis=1) if N else np.zeros((0, d), np.int64)
    return SamplingSet(gi * (TWO_PI / q), model, seed, grid_indices=gi)


# ---------------------------------------------------------------------------
# Measurement operator
# ---------------------------------------------------------------------------


class MeasurementOperator:
    """The map ``c -> (sum_k c_k exp(i k . x_j))_j`` and its adjoint.

    Parameters
    ----------
    frequency_set : FrequencySet
    sampling_set : SamplingSet
    dense_threshold : int, optional
        Store the full matrix when ``N * D`` does not exceed this.
    fast_path : bool, optional
        Allow the FFT evaluation for one-dimensional grid models with
        contiguous frequencies (default True).

    Notes
    -----
    Instances are immutable; ``forward`` and ``adjoint`` are safe to call
    from several threads.
    """

    def __init__(self, frequency_set, sampling_set, dense_threshold=DENSE_THRESHOLD, fast_path=True):
        if frequency_set.d != sampling_set.d:
            raise ShapeError(
                f"frequency dimension {frequency_set.d} != sampling dimension {sampling_set.d}"
            )
        model = sampling_set.model
        if model.q is not None:
            frequency_set.check_grid(model.q)
        self.frequency_set = frequency_set
        self.sampling_set = sampling_set
        self._q = model.q
        if model.q is not None:
            self._roots = np.exp(2j * np.pi * np.arange(model.q) / model.q)
        self._matrix = None
        if (
            fast_path
            and model.q is not None
            and frequency_set.d == 1
            and frequency_set.is_contiguous
            and frequency_set.D <= model.q
        ):
            self.method = "fft"
        elif self.N * self.D <= dense_threshold:
            self.method = "dense"
            self._matrix = self._phases(frequency_set.freqs)
            self._matrix.setflags(write=False)
        else:
            self.method = "direct"

    @property
    def N(self) -> int:
        return self.sampling_set.N

    @property
    def D(self) -> int:
        return self.frequency_set.D

    @property
    def shape(self):
        return (self.N, self.D)

    def _phases(self, freqs, rows=slice(None)):
        """Entries ``exp(i k . x_j)`` for the given frequency rows (N x len(freqs))."""
        if self._q is not None:
            gi = self.sampling_set.grid_indices[rows]
            p = np.mod(gi @ np.mod(freqs, self._q).T, self._q)
            return self._roots[p]
        x = self.sampling_set.points[rows]
        return np.exp(1j * (x @ freqs.T.astype(float)))

    def _check(self, v, n, name):
        v = np.asarray(v)
        if v.shape != (n,):
            raise ShapeError(f"{name} must have shape ({n},), got {v.shape}")
        return v.astype(complex, copy=False)

    def _row_chunks(self):
        step = max(1, DENSE_THRESHOLD // max(self.D, 1))
        for start in range(0, self.N, step):
            yield slice(start, min(start + step, self.N))

    def forward(self, c):
        """Sample values ``F c`` (length ``N``)."""
        c = self._check(c, self.D, "coefficient vector")
        if self.method == "dense":
            return self._matrix @ c
        if self.method == "fft":
            q = self._q
            a = np.zeros(q, dtype=complex)
            a[np.mod(self.frequency_set.freqs[:, 0], q)] = c
            full = np.fft.ifft(a) * q
            return full[self.sampling_set.grid_indices[:, 0]]
        out = np.empty(self.N, dtype=complex)
        for rows in self._row_chunks():
            out[rows] = self._phases(self.frequency_set.freqs, rows) @ c
        return out

    def adjoint(self, v):
        """Correlations ``F^* v`` (length ``D``)."""
        v = self._check(v, self.N, "sample vector")
        if self.method == "dense":
            return (v.conj() @ self._matrix).conj()
        if self.method == "fft":
            q = self._q
            m = self.sampling_set.grid_indices[:, 0]
            b = np.bincount(m, weights=v.real, minlength=q) + 1j * np.bincount(
                m, weights=v.imag, minlength=q
            )
            full = np.fft.fft(b)
            return full[np.mod(self.frequency_set.freqs[:, 0], q)]
        out = np.zeros(self.D, dtype=complex)
        for rows in self._row_chunks():
            out += (v[rows].conj() @ self._phases(self.frequency_set.freqs, rows)).conj()
        return out

    def column(self, k: int):
        """Column ``phi_k`` for column index ``k``."""
        return self.columns([k])[:, 0]

    def columns(self, idx: Sequence[int]):
        """Columns for the given indices, shape (N, len(idx))."""
        idx = np.asarray(idx, dtype=np.int64).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= self.D):
            raise IndexError("column index out of range")
        if self._matrix is not None:
            return self._matrix[:, idx]
        return self._phases(self.frequency_set.freqs[idx])

    def matrix(self):
        """Dense ``N x D`` matrix (built on demand if not stored)."""
        if self._matrix is not None:
            return self._matrix
        return self._phases(self.frequency_set.freqs)

    def gram(self, idx):
        """Normalised Gram matrix ``N^{-1} F_T^* F_T`` of the selected columns."""
        A = self.columns(idx)
        return (A.conj().T @ A) / self.N

    def __repr__(self):
        return f"MeasurementOperator(N={self.N}, D={self.D}, model={self.sampling_set.model}, method={self.method!r})"


# ---------------------------------------------------------------------------
# Coefficient and noise generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SparseCoefficients:
    """Complex coefficient vector with explicit support (sorted column indices)."""

    values: np.ndarray
    support: tuple

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 1:
            raise ShapeError("coefficient values must be one-dimensional")
        supp = tuple(sorted(int(k) for k in set(self.support)))
        if supp and (supp[0] < 0 or supp[-1] >= vals.size):
            raise IndexError("support index out of range")
        mask = np.ones(vals.size, dtype=bool)
        mask[list(supp)] = False
        if np.any(vals[mask] != 0):
            raise ValueError("coefficients must vanish outside the support")
        object.__setattr__(self, "values", _readonly(vals))
        object.__setattr__(self, "support", supp)

    @property
    def M(self) -> int:
        return len(self.support)

    @property
    def D(self) -> int:
        return int(self.values.size)

    @classmethod
    def from_dense(cls, values, tol=0.0):
        values = np.asarray(values, dtype=complex)
        support = np.flatnonzero(np.abs(values) > tol)
        clean = np.zeros_like(values)
        clean[support] = values[support]
        return cls(clean, tuple(support.tolist()))


def draw_sparse_coefficients(fs: FrequencySet, M: int, seed: int) -> SparseCoefficients:
    """Uniformly random ``M``-subset support with complex standard-normal entries.

    Real and imaginary parts are independent ``N(0, 1)``, so
    ``E|c_k|^2 = 2`` on the support.
    """
    D = fs.D
    if not 1 <= M <= D:
        raise InvalidSparsity(f"sparsity M={M} must satisfy 1 <= M <= D={D}")
    rng = rng_for(seed, "coefficients")
    support = np.sort(rng.choice(D, size=M, replace=False))
    vals = np.zeros(D, dtype=complex)
    vals[support] = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    return SparseCoefficients(vals, tuple(support.tolist()))


def draw_noise_on_sphere(N: int, sigma: float, seed: int):
    """Complex noise vector with direction uniform on the sphere and norm ``sigma``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0 or N == 0:
        return np.zeros(N, dtype=complex)
    rng = rng_for(seed, "noise")
    g = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    return g * (sigma / np.linalg.norm(g))


def forward(op: MeasurementOperator, c):
    return op.forward(c)


def adjoint(op: MeasurementOperator, v):
    return op.adjoint(v)
