import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from conftest import crandn, dense_oracle, make_op
from sparsetrig.errors import (
    GridAliasingError,
    InsufficientGridPoints,
    InvalidFrequencySet,
    InvalidSparsity,
    ShapeError,
)
from sparsetrig.fourier_ops import (
    ContinuousUniform,
    FrequencySet,
    GridSubset,
    GridWithReplacement,
    MeasurementOperator,
    SamplingSet,
    SparseCoefficients,
    adjoint,
    compute_D_prime,
    draw_noise_on_sphere,
    draw_samples,
    draw_sparse_coefficients,
    forward,
    make_frequency_set,
    parse_model,
)


# -- frequency sets ----------------------------------------------------------


def test_symmetric_set_256():
    fs = make_frequency_set(1, "symmetric:256")
    assert fs.D == 256
    assert fs.freqs[0, 0] == -127 and fs.freqs[-1, 0] == 128
    assert fs.is_contiguous


def test_singleton_range():
    fs = make_frequency_set(1, "range:0:0")
    assert fs.D == 1 and fs.freqs.tolist() == [[0]]


def test_box_2d_lexicographic():
    fs = make_frequency_set(2, "box:4")
    assert fs.D == 16
    assert tuple(fs.freqs[0]) == (0, 0)
    assert [tuple(f) for f in fs.freqs] == sorted(itertools.product(range(4), repeat=2))


def test_descriptor_forms_agree():
    a = make_frequency_set(1, "cube:3")
    b = make_frequency_set(1, ("cube", 3))
    c = make_frequency_set(1, list(range(-3, 4)))
    assert a == b == c


def test_explicit_list_is_sorted():
    fs = make_frequency_set(1, [3, -1, 0])
    assert fs.freqs[:, 0].tolist() == [-1, 0, 3]
    assert fs.index_of(3) == 2


@pytest.mark.parametrize("spec", [[], "range:3:1", "symmetric:0"])
def test_empty_frequency_set(spec):
    with pytest.raises(InvalidFrequencySet):
        make_frequency_set(1, spec)


def test_duplicate_frequencies_rejected():
    with pytest.raises(InvalidFrequencySet):
        make_frequency_set(1, [1, 2, 1])


def test_frequency_set_roundtrip():
    fs = make_frequency_set(2, "cube:1")
    assert FrequencySet.from_dict(json.loads(json.dumps(fs.to_dict()))) == fs


def _d_prime_brute(fs):
    f = [tuple(v) for v in fs.freqs.tolist()]
    return len({tuple(a - b for a, b in zip(x, y)) for x in f for y in f if x != y})


@pytest.mark.parametrize(
    "d,spec,expected",
    [(1, [0], 0), (1, "symmetric:256", 510), (1, [0, 1, 3], 6)],
)
def test_D_prime_examples(d, spec, expected):
    assert compute_D_prime(make_frequency_set(d, spec)) == expected


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=12, unique=True))
def test_D_prime_matches_enumeration(freqs):
    fs = make_frequency_set(1, freqs)
    dp = compute_D_prime(fs)
    assert dp == _d_prime_brute(fs)
    assert dp <= fs.D**2


def test_D_prime_2d_matches_enumeration():
    fs = make_frequency_set(2, [[0, 0], [1, 2], [3, 1], [2, 2]])
    assert compute_D_prime(fs) == _d_prime_brute(fs)


# -- sampling ----------------------------------------------------------------


def test_continuous_points_reproducible():
    fs = make_frequency_set(1, "symmetric:16")
    a = draw_samples(fs, ContinuousUniform(), 50, 9)
    b = draw_samples(fs, "continuous", 50, 9)
    assert a.N == 50
    assert np.all((a.points >= 0) & (a.points < 2 * np.pi))
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, draw_samples(fs, "continuous", 50, 10).points)


def test_grid_subset_full_grid():
    fs = make_frequency_set(1, "symmetric:256")
    X = draw_samples(fs, GridSubset(256), 256, 1)
    assert sorted(X.grid_indices[:, 0].tolist()) == list(range(256))


def test_grid_subset_too_many_points():
    fs = make_frequency_set(1, "range:0:3")
    with pytest.raises(InsufficientGridPoints):
        draw_samples(fs, GridSubset(4), 5, 0)


def test_grid_with_replacement_is_fair():
    fs = make_frequency_set(1, "range:0:1")
    X = draw_samples(fs, GridWithReplacement(2), 1000, 3)
    ones = int(X.grid_indices.sum())
    # binomial(1000, 1/2): within 3 standard deviations
    assert abs(ones - 500) <= 3 * np.sqrt(1000 * 0.25)
    assert set(np.unique(X.points).tolist()) <= {0.0, np.pi}


def test_grid_points_are_grid_multiples():
    fs = make_frequency_set(1, "symmetric:16")
    X = draw_samples(fs, "grid:32", 40, 5)
    m = X.points[:, 0] * 32 / (2 * np.pi)
    assert np.allclose(m, np.round(m), atol=1e-12)


def test_aliasing_detected():
    fs = make_frequency_set(1, "range:0:8")
    with pytest.raises(GridAliasingError):
        draw_samples(fs, GridSubset(8), 4, 0)
    # shifted symmetric set is injective modulo D
    make_frequency_set(1, "symmetric:8").check_grid(8)


def test_sampling_set_validation_and_roundtrip():
    with pytest.raises(ValueError):
        SamplingSet(np.array([2 * np.pi]), ContinuousUniform())
    with pytest.raises(ValueError):
        SamplingSet(np.array([0.1]), GridSubset(4))
    with pytest.raises(ValueError):
        SamplingSet(np.array([0.0, 0.0]), GridSubset(4))
    fs = make_frequency_set(1, "symmetric:8")
    X = draw_samples(fs, "subset:8", 5, 2)
    Y = SamplingSet.from_dict(json.loads(json.dumps(X.to_dict())))
    assert np.array_equal(X.points, Y.points) and Y.model == X.model
    assert np.array_equal(X.grid_indices, Y.grid_indices)


def test_parse_model():
    assert parse_model("continuous") == ContinuousUniform()
    assert parse_model("grid:16") == GridWithReplacement(16)
    assert parse_model({"kind": "subset", "q": 8}) == GridSubset(8)
    with pytest.raises(ValueError):
        parse_model("lattice")


# -- operator ----------------------------------------------------------------


def test_forward_unit_vector_is_column():
    op = make_op(D=8, N=5, seed=1)
    e = np.zeros(8, complex)
    e[3] = 1
    v = forward(op, e)
    assert np.allclose(np.abs(v), 1.0, atol=1e-14)
    assert np.allclose(v, np.exp(1j * 3 * op.sampling_set.points[:, 0]))


def test_forward_zero():
    op = make_op()
    assert np.array_equal(op.forward(np.zeros(op.D)), np.zeros(op.N))
    assert np.array_equal(op.adjoint(np.zeros(op.N)), np.zeros(op.D))


@pytest.mark.parametrize("model", ["continuous", "grid:16", "subset:16"])
@pytest.mark.parametrize("threshold", [0, 10**6])
def test_forward_adjoint_match_dense_oracle(model, threshold, rng):
    fs = make_frequency_set(1, "range:0:7")
    X = draw_samples(fs, model, 5, 4)
    op = MeasurementOperator(fs, X, dense_threshold=threshold, fast_path=False)
    A = dense_oracle(fs, X)
    c, v = crandn(rng, 8), crandn(rng, 5)
    assert np.allclose(op.forward(c), A @ c, rtol=1e-12, atol=1e-12)
    assert np.allclose(adjoint(op, v), A.conj().T @ v, rtol=1e-12, atol=1e-12)
    assert np.allclose(op.matrix(), A, atol=1e-12)


def test_forward_2d_matches_oracle(rng):
    fs = make_frequency_set(2, "cube:2")
    for model in ("continuous", "grid:8"):
        X = draw_samples(fs, model, 30, 8)
        op = MeasurementOperator(fs, X)
        c = crandn(rng, fs.D)
        assert np.allclose(op.forward(c), dense_oracle(fs, X) @ c, atol=1e-11)


def test_adjoint_of_column_gives_N():
    op = make_op(D=8, N=7, seed=2)
    for k in range(op.D):
        assert abs(op.adjoint(op.column(k))[k] - op.N) < 1e-12 * op.N


def test_shape_errors():
    op = make_op()
    with pytest.raises(ShapeError):
        op.forward(np.zeros(op.D + 1))
    with pytest.raises(ShapeError):
        op.adjoint(np.zeros((op.N, 1)))


@pytest.mark.parametrize("model", ["continuous", "grid:64", "subset:64"])
def test_adjointness_invariant(model):
    rng = np.random.default_rng(7)
    for trial in range(100):
        D = int(rng.integers(2, 65))
        N = int(rng.integers(1, 65))
        fs = make_frequency_set(1, f"symmetric:{D}")
        op = MeasurementOperator(fs, draw_samples(fs, model, N, trial))
        c, v = crandn(rng, D), crandn(rng, N)
        lhs = np.vdot(v, op.forward(c))
        rhs = np.vdot(op.adjoint(v), c)
        assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(c) * np.linalg.norm(v)


@pytest.mark.parametrize("model", ["continuous", "grid:256", "subset:256"])
def test_column_norms(model):
    fs = make_frequency_set(1, "symmetric:256")
    op = MeasurementOperator(fs, draw_samples(fs, model, 50, 1))
    norms2 = np.sum(np.abs(op.matrix()) ** 2, axis=0)
    assert np.allclose(norms2, 50, rtol=1e-10)


@pytest.mark.parametrize("model", ["grid:300", "subset:256", "grid:256"])
def test_fft_path_equals_direct(model, rng):
    fs = make_frequency_set(1, "symmetric:256")
    X = draw_samples(fs, model, 80, 3)
    fast = MeasurementOperator(fs, X)
    slow = MeasurementOperator(fs, X, dense_threshold=0, fast_path=False)
    assert fast.method == "fft" and slow.method == "direct"
    c, v = crandn(rng, 256), crandn(rng, 80)
    f1, f2 = fast.forward(c), slow.forward(c)
    a1, a2 = fast.adjoint(v), slow.adjoint(v)
    assert np.max(np.abs(f1 - f2)) <= 1e-10 * np.max(np.abs(f2))
    assert np.max(np.abs(a1 - a2)) <= 1e-10 * np.max(np.abs(a2))


def test_fft_path_with_repeated_points(rng):
    fs = make_frequency_set(1, "range:0:5")
    X = SamplingSet(np.array([0, 1, 1, 4]) * 2 * np.pi / 6, GridWithReplacement(6))
    op = MeasurementOperator(fs, X)
    v = crandn(rng, 4)
    assert op.method == "fft"
    assert np.allclose(op.adjoint(v), dense_oracle(fs, X).conj().T @ v, atol=1e-12)


def test_expected_gram_is_identity():
    # single-point draws: mean of z z^* over 10^4 points
    fs = make_frequency_set(1, "symmetric:8")
    X = draw_samples(fs, "continuous", 10_000, 77)
    Z = dense_oracle(fs, X)
    G = Z.conj().T @ Z / X.N
    assert np.max(np.abs(G - np.eye(8))) <= 5 / np.sqrt(10_000)


# -- coefficients and noise --------------------------------------------------


def test_full_support():
    fs = make_frequency_set(1, "range:0:9")
    c = draw_sparse_coefficients(fs, 10, 1)
    assert c.support == tuple(range(10)) and c.M == 10


def test_sparsity_out_of_range():
    fs = make_frequency_set(1, "range:0:9")
    with pytest.raises(InvalidSparsity):
        draw_sparse_coefficients(fs, 11, 1)
    with pytest.raises(InvalidSparsity):
        draw_sparse_coefficients(fs, 0, 1)


def test_coefficients_deterministic():
    fs = make_frequency_set(1, "symmetric:64")
    a, b = draw_sparse_coefficients(fs, 5, 42), draw_sparse_coefficients(fs, 5, 42)
    assert a.support == b.support and np.array_equal(a.values, b.values)
    off = np.setdiff1d(np.arange(64), a.support)
    assert np.all(a.values[off] == 0) and np.all(a.values[list(a.support)] != 0)


def test_coefficient_second_moment():
    fs = make_frequency_set(1, "symmetric:64")
    m2 = []
    for s in range(10_000):
        c = draw_sparse_coefficients(fs, 10, s)
        m2.append(np.mean(np.abs(c.values[list(c.support)]) ** 2))
    assert abs(np.mean(m2) - 2.0) <= 0.05 * 2.0


def test_support_uniformity():
    # each index is in the support with probability M / D
    fs = make_frequency_set(1, "range:0:7")
    counts = np.zeros(8)
    for s in range(4000):
        counts[list(draw_sparse_coefficients(fs, 2, s).support)] += 1
    _, p = stats.chisquare(counts)
    assert p > 1e-3


def test_sparse_coefficients_validation():
    with pytest.raises(ValueError):
        SparseCoefficients(np.array([1.0, 2.0]), (0,))
    c = SparseCoefficients.from_dense(np.array([0, 1e-9, 3]), tol=1e-6)
    assert c.support == (2,)


def test_noise_zero_and_norm():
    assert np.array_equal(draw_noise_on_sphere(5, 0.0, 1), np.zeros(5))
    eta = draw_noise_on_sphere(50, 0.4, 3)
    assert abs(np.linalg.norm(eta) - 0.4) <= 1e-12


def test_noise_direction_rotation_invariant():
    # angle of each complex entry should be uniform on (-pi, pi]
    angles = np.concatenate([np.angle(draw_noise_on_sphere(2, 1.0, s)) for s in range(10_000)])
    counts, _ = np.histogram(angles, bins=16, range=(-np.pi, np.pi))
    _, p = stats.chisquare(counts)
    assert p > 1e-3
    # the squared modulus of the first entry of a unit vector in C^2 is uniform on [0, 1]
    w = np.array([abs(draw_noise_on_sphere(2, 1.0, s)[0]) ** 2 for s in range(10_000)])
    assert stats.kstest(w, "uniform").pvalue > 1e-3


def test_noise_negative_sigma():
    with pytest.raises(ValueError):
        draw_noise_on_sphere(3, -1.0, 0)
