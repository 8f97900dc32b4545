import math

import numpy as np
import pytest

from clebsch.flux import Background, BoundaryData, ConfigurationError, hydro_potential, quadratic_bernoulli
from clebsch.euler import (
    ClebschState,
    EulerProblem,
    euler_functional,
    euler_gradient,
    euler_hessian_apply,
    euler_residual,
    euler_solve,
    make_scenario,
    quadratic_bound_check,
)
from clebsch.grid import Grid
from clebsch.lab import RandomFieldSampler
from clebsch.solver import SolveOptions, gradient_check, hessian_symmetry_defect
from clebsch.toy import fourier_diff_matrix


@pytest.fixture(scope="module")
def grid():
    return Grid((16, 12, 12), (1.0, 1.0, 1.0))


def small_state(pb, amp=1e-2, seed=0):
    F, G = RandomFieldSampler(pb.grid, seed=seed, max_modes=(3, 2, 2)).sample(2, stream=0)
    return pb.join(amp * F, amp * G)


def test_unperturbed_value_is_half_volume():
    g = Grid((16, 8, 10), (2.0, 1.5, 1.0))
    pb = make_scenario("unperturbed", g)
    assert pb.value(pb.zero_state()) == pytest.approx(0.5 * 3.0, rel=1e-14)


def test_sixteen_fold_homogeneity():
    rng = np.random.default_rng(0)
    w = rng.standard_normal((7, 5, 6))
    assert np.allclose(hydro_potential(2 * w), 16 * hydro_potential(w), rtol=1e-14)


def test_value_against_second_quadrature_path(grid):
    pb = make_scenario("perturbed", grid, eps=1e-2)
    x = small_state(pb, seed=1)
    F, G = pb.split(x)
    n0, n1, n2 = grid.counts
    D0 = grid.d0
    D1 = fourier_diff_matrix(n1, grid.extents[1])
    D2 = fourier_diff_matrix(n2, grid.extents[2])

    def grad(u):
        return (
            np.einsum("ia,ajk->ijk", D0, u),
            np.einsum("ja,iak->ijk", D1, u),
            np.einsum("ka,ija->ijk", D2, u),
        )

    x1, y, z = grid.mesh
    pf = pb.boundary.df + F
    pg = pb.boundary.dg + G
    fx, fy, fz = grad(pf)
    gx, gy, gz = grad(pg)
    fy, gz = fy + 1.0, gz + 1.0
    v = (fy * gz - fz * gy, fz * gx - fx * gz, fx * gy - fy * gx)
    dens = 0.5 * (v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
    w = np.einsum("i,j,k->ijk", grid.w0, np.full(n1, 1.0 / n1), np.full(n2, 1.0 / n2))
    oracle = float(np.sum(w * dens))
    assert pb.value(x) == pytest.approx(oracle, rel=1e-12)


def test_perturbed_value_closed_form():
    # at F = G = 0: |v|^2 = 1 + (eps pi sin(pi x) cos(2 pi z))^2
    eps = 1e-2
    exact = 0.5 * (1 + (eps * math.pi) ** 2 / 4)
    vals = []
    for n in (16, 32):
        pb = make_scenario("perturbed", Grid((n, 8, 8)), eps=eps)
        vals.append(abs(pb.value(pb.zero_state()) - exact))
    assert vals[1] < 1e-9 and vals[1] < vals[0]


def test_zero_gradient_at_background(grid):
    pb = make_scenario("unperturbed", grid)
    assert np.abs(pb.gradient(pb.zero_state())).max() < 1e-13


@pytest.mark.parametrize("name", ["perturbed", "bernoulli"])
def test_derivative_checks(grid, name):
    pb = make_scenario(name, grid)
    for x in (pb.zero_state(), small_state(pb, seed=2)):
        assert gradient_check(pb, x) <= 1e-6
        assert hessian_symmetry_defect(pb, x) <= 1e-10


def test_pair_wrappers(grid):
    pb = make_scenario("bernoulli", grid)
    x = small_state(pb, seed=3)
    st = ClebschState(*pb.split(x))
    assert euler_functional(pb, st) == pb.value(x)
    gr = euler_gradient(pb, st)
    assert np.array_equal(pb.join(gr.F, gr.G), pb.gradient(x))
    d = small_state(pb, seed=4)
    hv = euler_hessian_apply(pb, st, ClebschState(*pb.split(d)))
    assert np.array_equal(pb.join(hv.F, hv.G), pb.hessian_apply(x, d))


def test_clebsch_state_rejects_boundary_values(grid):
    with pytest.raises(ConfigurationError):
        ClebschState(np.ones(grid.shape), np.zeros(grid.shape))


def test_unperturbed_solve_is_immediate(grid):
    pb = make_scenario("unperturbed", grid)
    x, rep, flow, _ = euler_solve(pb)
    assert rep.converged and rep.iterations == 0 and not x.any()
    res = euler_residual(pb, x)
    assert res["momentum_l2"] < 1e-12 and res["divergence_l2"] < 1e-12


def test_negative_control_residual(grid):
    pb = make_scenario("perturbed", grid)
    res = euler_residual(pb, small_state(pb, amp=0.1, seed=5))
    assert res["momentum_l2"] > 1e-3


def test_quadratic_bernoulli_rejected(grid):
    pb = EulerProblem(grid, bernoulli=quadratic_bernoulli())
    with pytest.raises(ConfigurationError, match="not compatible"):
        euler_solve(pb)


def test_bernoulli_scenario_converges_below_start(grid):
    pb = make_scenario("bernoulli", grid, amplitude=1e-3)
    x, rep, flow, diag = euler_solve(pb, SolveOptions(grad_tol=1e-11))
    assert rep.converged and rep.final_grad_norm <= 1e-11
    assert pb.value(x) <= pb.value(pb.zero_state())
    # central differences see a critical point too
    d = small_state(pb, amp=1.0, seed=7)
    d /= pb.norm(d)
    fd = (pb.value(x + 1e-5 * d) - pb.value(x - 1e-5 * d)) / 2e-5
    assert abs(fd) <= 1e-6
    assert rep.min_rayleigh > 0 and diag["bernoulli"]["admissible"]


def test_divergence_small_for_generic_states():
    errs = []
    for n in (16, 32):
        pb = make_scenario("perturbed", Grid((n, 8, 8)))
        F = np.zeros(pb.grid.shape)
        x0, y, z = pb.grid.mesh
        F = 0.05 * np.sin(np.pi * x0) ** 2 * np.sin(2 * np.pi * y) * np.cos(2 * np.pi * z)
        G = 0.05 * np.sin(2 * np.pi * x0) * np.cos(2 * np.pi * y)
        F[[0, -1]] = 0
        G[[0, -1]] = 0
        errs.append(euler_residual(pb, pb.join(F, G))["divergence_l2"])
    assert errs[1] < errs[0] / 2**3


def test_quadratic_bounds_hold(grid):
    pb = make_scenario("perturbed", grid)
    rep = quadratic_bound_check(pb, small_state(pb, seed=6), samples=20)
    assert rep["pointwise_min_margin"] >= -1e-10
    assert rep["identity_defect"] <= 1e-12
    assert rep["affine_min_margin"] >= 0


def test_affine_bound_closed_form():
    g = Grid((32, 8, 8))
    pb = make_scenario("unperturbed", g)
    F = np.sin(np.pi * g.mesh[0])
    F[[0, -1]] = 0
    d = pb.join(F, np.zeros(g.shape))
    B = pb.inner(d, pb.hessian_apply(pb.zero_state(), d))
    # B = int F_x^2 = pi^2 / 2; the lower bound is (1/4)(pi^2/32 + pi^2/64)
    assert B == pytest.approx(math.pi**2 / 2, rel=1e-6)
    bound = 0.25 * (math.pi**2 / 32 + math.pi**2 / 64)
    assert B - bound >= math.pi**2 / 2 - 3 * math.pi**2 / 256 - 1e-5


def test_parallel_background_rejected():
    with pytest.raises(ConfigurationError, match="nonzero first component"):
        Background(grad_f=(0.0, 1.0, 0.0), grad_g=(1.0, 1.0, 0.0))


def test_nearly_parallel_background_trivializes_pointwise_bound(grid):
    delta = 1e-6
    pb = EulerProblem(grid, Background(grad_f=(0.0, 1.0, 0.0), grad_g=(1.0, 1.0, delta)), precond="none")
    rep = quadratic_bound_check(pb, samples=5)
    assert rep["identity_defect"] <= 1e-15
    assert rep["pointwise_min_margin"] >= 0
