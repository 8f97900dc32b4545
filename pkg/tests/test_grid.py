import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clebsch.fields import FieldError, ScalarField, VectorField
from clebsch.grid import Grid, GridSizeError, cross, multi_indices


@pytest.fixture(scope="module")
def g2():
    return Grid((33, 32))


def test_spectral_derivative_exact(g2):
    x1, x2 = g2.mesh
    u = np.sin(2 * np.pi * x2) * (1 + x1)
    assert np.max(np.abs(g2.diff(u, 1) - 2 * np.pi * np.cos(2 * np.pi * x2) * (1 + x1))) < 1e-12
    assert np.max(np.abs(g2.diff(u, 1, 3) + (2 * np.pi) ** 3 * np.cos(2 * np.pi * x2) * (1 + x1))) < 1e-9


def test_axis0_quadratic_exact(g2):
    x1, _ = g2.mesh
    assert np.max(np.abs(g2.diff(x1 * (1 - x1), 0) - (1 - 2 * x1))) < 1e-12


def test_axis0_rate():
    errs = []
    for n in (40, 80):
        g = Grid((n, 4))
        x1, _ = g.mesh
        errs.append(np.max(np.abs(g.diff(np.sin(np.pi * x1), 0) - np.pi * np.cos(np.pi * x1))))
    rate = math.log(errs[0] / errs[1]) / math.log(79 / 39)
    assert 3.5 < rate < 5.0


def test_repeated_periodic_diff_matches_single_call(g2):
    rng = np.random.default_rng(0)
    u = rng.standard_normal(g2.shape)
    assert np.allclose(g2.diff(g2.diff(u, 1), 1), g2.diff(u, 1, 2), atol=1e-10)


def test_quadrature(g2):
    x1, x2 = g2.mesh
    assert abs(g2.integrate(np.ones(g2.shape)) - 1.0) < 1e-14
    assert abs(g2.l2_norm(np.sin(2 * np.pi * x2)) ** 2 - 0.5) < 1e-14
    assert abs(Grid((20, 6, 5), (2.0, 3.0, 0.5)).integrate(np.ones((20, 6, 5))) - 3.0) < 1e-14


def test_h1_norm_closed_form():
    # ||u||^2 = 1/4, ||u_x||^2 = pi^2/4, ||u_y||^2 = pi^2
    exact = math.sqrt(0.25 + 5 * math.pi**2 / 4)
    errs = []
    for n in (32, 64):
        g = Grid((n, 16))
        x1, x2 = g.mesh
        errs.append(abs(g.sobolev_norm(np.sin(np.pi * x1) * np.sin(2 * np.pi * x2), 1) - exact))
    assert errs[1] < 1e-6 and errs[1] < errs[0] / 8


def test_seminorms_keys():
    g = Grid((16, 8))
    s = g.sobolev_seminorms(np.zeros(g.shape), 2)
    assert set(s) == {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
    assert list(multi_indices(3, 1)) == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)]


def test_integration_by_parts_periodic(g2):
    rng = np.random.default_rng(1)
    u, w = rng.standard_normal((2,) + g2.shape)
    assert abs(g2.inner(g2.diff(u, 1), w) + g2.inner(u, g2.diff(w, 1))) < 1e-12


def test_integration_by_parts_axis0_dirichlet(g2):
    rng = np.random.default_rng(2)
    u, w = rng.standard_normal((2,) + g2.shape)
    u[[0, -1]] = 0
    w[[0, -1]] = 0
    # summation by parts: exact, not merely O(h^p)
    assert abs(g2.inner(g2.diff(u, 0), w) + g2.inner(u, g2.diff(w, 0))) < 1e-12


def test_divergence_adjoint(g2):
    rng = np.random.default_rng(3)
    q = tuple(rng.standard_normal(g2.shape) for _ in range(2))
    v = rng.standard_normal(g2.shape)
    lhs = g2.integrate(g2.divergence_adjoint(q) * v)
    rhs = -g2.integrate(sum(a * b for a, b in zip(q, g2.gradient(v))))
    assert abs(lhs - rhs) < 1e-11
    inner = g2.interior
    assert np.allclose(g2.divergence_adjoint(q)[inner], g2.divergence(q)[inner], atol=1e-10)


def test_cross_and_background_velocity():
    g = Grid((16, 8, 8))
    one, zero = np.ones(g.shape), np.zeros(g.shape)
    # affine potentials are not periodic; their gradients are supplied as constants
    v = cross((zero, one, zero), (zero, zero, one))
    assert np.allclose(v[0], 1) and np.allclose(v[1], 0) and np.allclose(v[2], 0)
    e = cross((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    assert e == (0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        cross((1, 0), (0, 1))


def test_divergence_of_cross_product_small():
    errs = []
    for n in (24, 48):
        g = Grid((n, 12, 12))
        x, y, z = g.mesh
        f = y + 0.1 * np.sin(np.pi * x) * np.cos(2 * np.pi * (y + z)) * np.exp(x)
        gg = z + 0.1 * x**2 * np.sin(2 * np.pi * y)
        df = tuple(c for c in g.gradient(f - y))
        df = (df[0], df[1] + 1, df[2])
        dg = g.gradient(gg - z)
        dg = (dg[0], dg[1], dg[2] + 1)
        errs.append(g.l2_norm(g.divergence(cross(df, dg))))
    assert errs[1] < 1e-4 and errs[1] < errs[0]


def test_poincare_axis0():
    from clebsch.lab import discrete_poincare_constant

    g = Grid((64, 4))
    assert discrete_poincare_constant(g) <= 1 / math.pi + 0.01


def test_sizing_errors():
    with pytest.raises(GridSizeError):
        Grid((10, 8))
    with pytest.raises(GridSizeError):
        Grid((16, 8, 8, 8))
    with pytest.raises(GridSizeError):
        Grid((16, 8), (1.0, -1.0))
    with pytest.raises(ValueError):
        Grid((16, 8)).diff(np.zeros((16, 8)), 2)


def test_fields_validation():
    g = Grid((16, 8))
    f = ScalarField.from_function(g, lambda x, y: np.sin(np.pi * x) + 1, dirichlet=True)
    assert np.all(f.values[0] == 0)
    with pytest.raises(FieldError):
        ScalarField(g, np.ones(g.shape), dirichlet=True)
    with pytest.raises(FieldError):
        ScalarField(g, np.full(g.shape, np.nan))
    with pytest.raises(FieldError):
        VectorField(g, (np.ones(g.shape), np.ones((3, 3))))
    assert len(VectorField(g, (np.ones(g.shape),) * 2)) == 2


@settings(max_examples=25, deadline=None)
@given(
    k=st.integers(1, 7),
    phase=st.floats(0, 2 * np.pi),
    n=st.sampled_from([16, 17, 24, 31]),
)
def test_fourier_exact_on_resolved_modes(k, phase, n):
    g = Grid((16, n), (1.0, 2.0))
    _, x2 = g.mesh
    arg = 2 * np.pi * k * x2 / 2.0 + phase
    if k >= n / 2:
        return
    assert np.max(np.abs(g.diff(np.sin(arg), 1) - (np.pi * k) * np.cos(arg))) < 1e-10


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), p=st.sampled_from([1, 2, 3, 4]))
def test_sbp_ibp_property(seed, p):
    g = Grid((4 * p + 5, 6), derivative_order=p)
    rng = np.random.default_rng(seed)
    u, w = rng.standard_normal((2,) + g.shape)
    lhs = g.inner(g.diff(u, 0), w) + g.inner(u, g.diff(w, 0))
    # boundary term of the SBP identity
    bt = np.sum((u[-1] * w[-1] - u[0] * w[0])) * g.spacing[1]
    assert abs(lhs - bt) < 1e-10 * (1 + abs(bt))
