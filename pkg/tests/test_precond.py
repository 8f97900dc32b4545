import numpy as np
import pytest

from clebsch.flux import make_toy_flux
from clebsch.grid import Grid
from clebsch.euler import EulerProblem
from clebsch.precond import SlabPreconditioner
from clebsch.toy import ToyProblem


def test_exact_inverse_for_identity_flux():
    g = Grid((20, 12), (1.0, 2.0))
    pb = ToyProblem(g, make_toy_flux("identity"), np.zeros(g.shape), precond="laplacian")
    pb.prepare(pb.zero_state())
    rng = np.random.default_rng(0)
    d = rng.standard_normal(pb.weights.size)
    assert np.allclose(pb.precondition(pb.hessian_apply(pb.zero_state(), d)), d, atol=1e-9)


def test_exact_inverse_at_background():
    g = Grid((16, 8, 10), (1.0, 1.0, 2.0))
    pb = EulerProblem(g)
    rng = np.random.default_rng(1)
    d = rng.standard_normal(pb.weights.size)
    x0 = pb.zero_state()
    assert np.allclose(pb.precondition(pb.hessian_apply(x0, d)), d, atol=1e-9)


def test_self_adjoint_positive():
    g = Grid((16, 9))
    pc = SlabPreconditioner(g, [[1.0]], [[[[0.3]]]])
    w = g.weights[g.interior].reshape(-1)
    rng = np.random.default_rng(2)
    a, b = rng.standard_normal((2, w.size))
    assert abs(np.dot(w * pc(a), b) - np.dot(w * a, pc(b))) < 1e-12 * np.linalg.norm(a) * np.linalg.norm(b)
    assert np.dot(w * pc(a), a) > 0


def test_one_cg_iteration_when_exact():
    from clebsch.solver import SolveOptions, minimize

    g = Grid((24, 16))
    x1, x2 = g.mesh
    pb = ToyProblem(g, make_toy_flux("identity"), np.sin(np.pi * x1) * np.cos(2 * np.pi * x2), precond="laplacian")
    x, rep = minimize(pb, pb.zero_state(), SolveOptions(cg_rtol=1e-12))
    assert rep.converged and rep.history[1].cg_iterations == 1
