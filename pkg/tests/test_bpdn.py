import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import crandn, make_op
from fixtures_io import load_bpdn_fixtures
from sparsetrig.bpdn import (
    BpdnConfig,
    best_m_term,
    bp_stability_check,
    bpdn_solve,
    complex_soft_threshold,
    optimality_residual,
    project_l2_ball,
)
from sparsetrig.errors import InvalidConfig, InvalidRadius, ShapeError
from sparsetrig.fourier_ops import (
    MeasurementOperator,
    draw_noise_on_sphere,
    draw_samples,
    draw_sparse_coefficients,
    make_frequency_set,
)

FIXTURES = load_bpdn_fixtures()


def instance(D, N, M, sigma, seed, model="continuous"):
    fs = make_frequency_set(1, f"symmetric:{D}")
    op = MeasurementOperator(fs, draw_samples(fs, model, N, seed))
    c = draw_sparse_coefficients(fs, M, seed)
    y = op.forward(c.values) + draw_noise_on_sphere(N, sigma, seed)
    return op, c, y


# -- proximal pieces -----------------------------------------------------------


def test_soft_threshold_examples():
    assert complex_soft_threshold(np.array([0j]), 0.5)[0] == 0
    v = 2 * 0.3 * np.exp(1j * 0.7)
    out = complex_soft_threshold(np.array([v]), 0.3)[0]
    assert abs(abs(out) - 0.3) < 1e-15 and abs(np.angle(out) - 0.7) < 1e-14
    r = np.array([-2.0, -0.1, 0.0, 0.4, 3.0])
    assert np.allclose(complex_soft_threshold(r, 0.5), np.sign(r) * np.maximum(np.abs(r) - 0.5, 0))
    with pytest.raises(ValueError):
        complex_soft_threshold(r, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), st.floats(1e-3, 10))
def test_soft_threshold_is_prox(v, kappa):
    # the prox minimises kappa |x| + |x - v|^2 / 2; compare against nearby points
    x = complex_soft_threshold(np.array([v]), kappa)[0]
    f = lambda z: kappa * abs(z) + 0.5 * abs(z - v) ** 2
    for dz in (1e-3, -1e-3, 1e-3j, -1e-3j):
        assert f(x) <= f(x + dz) + 1e-12
    assert abs(x) <= abs(v)


def test_projection_examples():
    c = np.array([1 + 1j, 2.0])
    assert np.array_equal(project_l2_ball(c, c, 1.0), c)
    v = np.array([3.0, -1j])
    assert np.array_equal(project_l2_ball(v, c, 0.0), c)
    d = np.array([0.6, 0.8j])
    p = project_l2_ball(c + 2 * 0.5 * d, c, 0.5)
    assert abs(np.linalg.norm(p - c) - 0.5) < 1e-15
    assert np.allclose(p - c, 0.5 * d)
    with pytest.raises(InvalidRadius):
        project_l2_ball(v, c, -1.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.floats(0, 5), st.integers(0, 10**6))
def test_projection_properties(n, radius, seed):
    rng = np.random.default_rng(seed)
    v, w, c = crandn(rng, n), crandn(rng, n), crandn(rng, n)
    p, q = project_l2_ball(v, c, radius), project_l2_ball(w, c, radius)
    assert np.linalg.norm(p - c) <= radius * (1 + 1e-12) + 1e-15
    assert np.allclose(project_l2_ball(p, c, radius), p)
    assert np.linalg.norm(p - q) <= np.linalg.norm(v - w) + 1e-12
    # variational inequality <v - p, z - p> <= 0 for z in the ball
    z = project_l2_ball(crandn(rng, n), c, radius)
    assert np.real(np.vdot(v - p, z - p)) <= 1e-9


# -- solver ------------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(InvalidRadius):
        BpdnConfig(sigma=-0.1)
    for bad in ({"abs_tol": 0}, {"max_iters": 0}, {"penalty": -1}, {"relaxation": 2.0}, {"linear_solver": "qr"}):
        with pytest.raises(InvalidConfig):
            BpdnConfig(**bad)


def test_shape_error():
    op = make_op()
    with pytest.raises(ShapeError):
        bpdn_solve(op, np.zeros(op.N + 2))


def test_zero_is_optimal_inside_ball():
    op, c, y = instance(16, 10, 2, 0.0, 1)
    res = bpdn_solve(op, y, sigma=1.01 * np.linalg.norm(y))
    assert res.l1_norm <= 1e-8 and res.converged


def test_full_grid_closed_form():
    fs = make_frequency_set(1, "symmetric:16")
    op = MeasurementOperator(fs, draw_samples(fs, "subset:16", 16, 2))
    y = crandn(np.random.default_rng(1), 16)
    res = bpdn_solve(op, y, sigma=0.0)
    assert np.max(np.abs(res.coefficients - op.adjoint(y) / 16)) < 1e-8


@pytest.mark.parametrize("fx", FIXTURES, ids=[f["name"] for f in FIXTURES])
def test_matches_reference_solver(fx):
    op, y, sigma = fx["op"], fx["y"], fx["sigma"]
    res = bpdn_solve(op, y, sigma=sigma)
    ref_l1 = fx["reference_l1"]
    assert res.converged
    assert abs(res.l1_norm - ref_l1) <= 1e-4 * ref_l1
    assert res.l1_norm <= ref_l1 * (1 + 1e-4)
    assert np.linalg.norm(res.coefficients - fx["reference_solution"]) <= 1e-3
    assert res.feasibility_gap <= 1e-8 * (1 + np.linalg.norm(y))
    assert optimality_residual(op, y, res.coefficients, sigma) < 1e-4
    # the interior-point reference is accurate to about 1e-5 per entry
    assert optimality_residual(op, y, fx["reference_solution"], sigma) < 1e-3


def test_l1_norm_recomputable():
    op, c, y = instance(32, 16, 3, 0.1, 3)
    res = bpdn_solve(op, y, sigma=0.1)
    assert res.l1_norm == float(np.sum(np.abs(res.coefficients)))
    assert res.feasibility_gap == max(0.0, np.linalg.norm(op.forward(res.coefficients) - y) - 0.1)


def test_optimality_residual_detects_suboptimal_point():
    fx = FIXTURES[0]
    bad = fx["reference_solution"] + 0.05
    assert optimality_residual(fx["op"], fx["y"], bad, fx["sigma"]) > 1e-2


def test_nonconvergence_is_reported():
    op, c, y = instance(64, 30, 4, 0.1, 2)
    res = bpdn_solve(op, y, sigma=0.1, max_iters=3)
    assert not res.converged and res.iterations == 3


@pytest.mark.parametrize("sigma", [0.0, 0.2])
def test_cg_path_matches_direct(sigma):
    op, c, y = instance(48, 24, 3, sigma, 4)
    a = bpdn_solve(op, y, sigma=sigma, linear_solver="direct")
    b = bpdn_solve(op, y, sigma=sigma, linear_solver="cg")
    assert a.converged and b.converged
    assert abs(a.l1_norm - b.l1_norm) <= 1e-5 * a.l1_norm
    assert np.linalg.norm(a.coefficients - b.coefficients) <= 1e-3


def test_tall_system_uses_other_factorisation():
    op, c, y = instance(16, 40, 3, 0.2, 9)
    res = bpdn_solve(op, y, sigma=0.2)
    assert res.converged
    assert optimality_residual(op, y, res.coefficients, 0.2) < 1e-4


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_scaling_equivariance(alpha):
    op, c, y = instance(64, 30, 4, 0.3, 5)
    a = bpdn_solve(op, y, sigma=0.3)
    b = bpdn_solve(op, alpha * y, sigma=0.3 * alpha)
    assert np.linalg.norm(b.coefficients - alpha * a.coefficients) <= 1e-5 * alpha * np.linalg.norm(a.coefficients)


def test_noiseless_recovery_rate():
    good = 0
    for s in range(200):
        op, c, y = instance(64, 40, 4, 0.0, s)
        res = bpdn_solve(op, y, sigma=0.0)
        mag = np.abs(res.coefficients)
        supp = set(np.flatnonzero(mag > 1e-3 * mag.max()).tolist())
        good += supp == set(c.support) and np.linalg.norm(res.coefficients - c.values) <= 1e-6
    assert good >= 180


# -- stability check ------------------------------------------------------------------


def test_stability_examples():
    c = np.array([1.0, 0, -2, 0])
    chk = bp_stability_check(c, c, 0.0, 10, 2)
    assert chk.lhs == 0 and chk.rhs == 0 and chk.holds
    chk = bp_stability_check(c, c + 0.1, 1.0, 100, 2)
    assert abs(chk.rhs - 1.204) < 1e-12
    tail = np.array([5.0, 4, 3, 2, 1, 0.5, 0.5])  # tail beyond 4 terms has l1 norm 2
    chk = bp_stability_check(tail, tail, 0.0, 50, 4)
    assert abs(chk.rhs - 8.77) < 1e-12


def test_best_m_term_ties():
    c = np.array([1.0, -1.0, 1.0, 0.5])
    assert np.array_equal(best_m_term(c, 2), np.array([1.0, -1.0, 0, 0]))
