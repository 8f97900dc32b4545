"""Flux maps and scalar data for the toy and hydrodynamic problems.

Toy fluxes ``a(x, z)`` are given together with their Jacobian in ``z`` and a
potential ``Gamma`` with ``a = grad_z Gamma``.  New fluxes are added by
registering a factory with :func:`register_toy_flux`; there is no runtime
expression parsing.

The hydrodynamic flux is the gradient of ``Gamma(w) = |A x B|^2 / 2`` with
``A = (w1, w2, w3)``, ``B = (w4, w5, w6)``:

    a_{1,2,3} = B x (A x B) = |B|^2 A - (A.B) B
    a_{4,5,6} = (A x B) x A = |A|^2 B - (A.B) A
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Grid, cross


class ConfigurationError(ValueError):
    """Invalid or inconsistent problem data."""


# ---------------------------------------------------------------------------
# toy fluxes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ToyFlux:
    """Flux ``a(x1, x2, z1, z2)`` with Jacobian ``(J11, J12, J21, J22)`` in ``z``.

    ``rho`` is the weak coercivity constant: ``p^T J p >= rho p1^2`` is
    expected for ``|z| <= rho``.
    """

    name: str
    flux: Callable
    jacobian: Callable
    rho: float
    potential: Callable | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, x1, x2, z1, z2):
        return self.flux(x1, x2, z1, z2)


TOY_FLUXES: dict[str, Callable[..., ToyFlux]] = {}


def register_toy_flux(name: str):
    """Register a factory ``f(**params) -> ToyFlux`` under ``name``."""

    def deco(factory):
        TOY_FLUXES[name] = factory
        return factory

    return deco


def make_toy_flux(name: str, **params) -> ToyFlux:
    try:
        factory = TOY_FLUXES[name]
    except KeyError:
        raise ConfigurationError(f"unknown toy flux {name!r}; known: {sorted(TOY_FLUXES)}") from None
    return factory(**params)


def _zeros_like(*arrs):
    return np.zeros(np.broadcast(*arrs).shape)


@register_toy_flux("identity")
def identity_flux(rho: float = 1.0) -> ToyFlux:
    return ToyFlux(
        "identity",
        flux=lambda x1, x2, z1, z2: (z1 + 0.0 * x1, z2 + 0.0 * x1),
        jacobian=lambda x1, x2, z1, z2: (
            1.0 + _zeros_like(x1, z1),
            _zeros_like(x1, z1),
            _zeros_like(x1, z1),
            1.0 + _zeros_like(x1, z1),
        ),
        potential=lambda x1, x2, z1, z2: 0.5 * (z1**2 + z2**2) + 0.0 * x1,
        rho=rho,
        params={"rho": rho},
    )


@register_toy_flux("linear")
def linear_flux(m11: float = 1.0, m12: float = 0.3, m22: float = 0.1, rho: float = 0.1) -> ToyFlux:
    """``a(z) = M z`` with symmetric ``M``."""

    def jac(x1, x2, z1, z2):
        o = _zeros_like(x1, z1)
        return (m11 + o, m12 + o, m12 + o, m22 + o)

    return ToyFlux(
        "linear",
        flux=lambda x1, x2, z1, z2: (m11 * z1 + m12 * z2 + 0.0 * x1, m12 * z1 + m22 * z2 + 0.0 * x1),
        jacobian=jac,
        potential=lambda x1, x2, z1, z2: 0.5 * (m11 * z1**2 + 2 * m12 * z1 * z2 + m22 * z2**2) + 0.0 * x1,
        rho=rho,
        params={"m11": m11, "m12": m12, "m22": m22, "rho": rho},
    )


@register_toy_flux("quartic")
def quartic_flux(rho: float = 1.0) -> ToyFlux:
    """``a(z) = (z1, z2^3)``: degenerate on ``z2 = 0``."""
    return ToyFlux(
        "quartic",
        flux=lambda x1, x2, z1, z2: (z1 + 0.0 * x1, z2**3 + 0.0 * x1),
        jacobian=lambda x1, x2, z1, z2: (
            1.0 + _zeros_like(x1, z1),
            _zeros_like(x1, z1),
            _zeros_like(x1, z1),
            3.0 * z2**2 + _zeros_like(x1, z1),
        ),
        potential=lambda x1, x2, z1, z2: 0.5 * z1**2 + 0.25 * z2**4 + 0.0 * x1,
        rho=rho,
        params={"rho": rho},
    )


@register_toy_flux("xdep")
def xdep_flux(eps: float = 0.05, rho: float = 0.5) -> ToyFlux:
    """Space-dependent quartic flux, coercive for ``rho <= 1 - eps``.

    Gamma = c(x) z1^2/2 + d(x) z2^4/4 with c = 1 + eps sin(pi x1) sin(2 pi x2)
    and d = 1 + eps cos(2 pi x2).
    """
    if not 0 <= eps < 1:
        raise ConfigurationError("xdep: eps must lie in [0, 1)")

    def coeffs(x1, x2):
        c = 1.0 + eps * np.sin(np.pi * x1) * np.sin(2 * np.pi * x2)
        d = 1.0 + eps * np.cos(2 * np.pi * x2) + 0.0 * x1
        return c, d

    def flux(x1, x2, z1, z2):
        c, d = coeffs(x1, x2)
        return (c * z1, d * z2**3)

    def jac(x1, x2, z1, z2):
        c, d = coeffs(x1, x2)
        zero = 0.0 * (c * z1 * z2)
        return (c + zero, zero, zero, 3 * d * z2**2 + zero)

    def pot(x1, x2, z1, z2):
        c, d = coeffs(x1, x2)
        return 0.5 * c * z1**2 + 0.25 * d * z2**4

    return ToyFlux("xdep", flux=flux, jacobian=jac, potential=pot, rho=rho, params={"eps": eps, "rho": rho})


def toy_check_hypotheses(flux: ToyFlux, grid: Grid, samples: int, seed: int = 0, fd_step: float = 1e-6) -> dict:
    """Sample the structural hypotheses of a toy flux.

    Points ``x`` are grid nodes, ``z`` is uniform in the disc ``|z| <= rho``.
    Returns the largest symmetry defect (analytic and finite-difference), the
    smallest coercivity margin ``min_p (p^T J p - rho p1^2)`` over unit ``p``
    (the smallest eigenvalue of ``J - rho e1 e1^T``), the Jacobian's agreement
    with central differences of ``a``, and ``max |a(x, 0)|``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    idx = tuple(rng.integers(0, n, samples) for n in grid.shape[:2])
    x1 = grid.axes[0][idx[0]]
    x2 = grid.axes[1][idx[1]]
    rad = flux.rho * np.sqrt(rng.uniform(0, 1, samples))
    th = rng.uniform(0, 2 * np.pi, samples)
    z1, z2 = rad * np.cos(th), rad * np.sin(th)

    j11, j12, j21, j22 = flux.jacobian(x1, x2, z1, z2)
    e = fd_step
    ap1 = flux.flux(x1, x2, z1 + e, z2)
    am1 = flux.flux(x1, x2, z1 - e, z2)
    ap2 = flux.flux(x1, x2, z1, z2 + e)
    am2 = flux.flux(x1, x2, z1, z2 - e)
    fd = (
        (ap1[0] - am1[0]) / (2 * e),
        (ap2[0] - am2[0]) / (2 * e),
        (ap1[1] - am1[1]) / (2 * e),
        (ap2[1] - am2[1]) / (2 * e),
    )
    jac_fd_defect = max(float(np.max(np.abs(a - b))) for a, b in zip((j11, j12, j21, j22), fd))
    symmetry_fd = float(np.max(np.abs(fd[1] - fd[2])))

    # smallest eigenvalue of [[j11 - rho, j12], [j12, j22]] in closed form
    a11 = j11 - flux.rho
    sym = 0.5 * (j12 + j21)
    tr = a11 + j22
    disc = np.sqrt((a11 - j22) ** 2 + 4 * sym**2)
    margin = 0.5 * (tr - disc)

    a0 = flux.flux(x1, x2, 0.0 * z1, 0.0 * z2)
    return {
        "symmetry_defect": max(float(np.max(np.abs(j12 - j21))), symmetry_fd),
        "jacobian_fd_defect": jac_fd_defect,
        "min_coercivity_margin": float(np.min(margin)),
        "origin_defect": float(np.max(np.hypot(a0[0], a0[1]))),
        "samples": int(samples),
        "rho": float(flux.rho),
    }


# ---------------------------------------------------------------------------
# hydrodynamic flux
# ---------------------------------------------------------------------------


def hydro_flux(w: np.ndarray) -> np.ndarray:
    """Developed polynomial form of the 6-component flux; ``w`` has shape ``(..., 6)``."""
    w = np.asarray(w, dtype=float)
    w1, w2, w3, w4, w5, w6 = np.moveaxis(w, -1, 0)
    return np.stack(
        [
            w5**2 * w1 + w6**2 * w1 - w2 * w4 * w5 - w3 * w4 * w6,
            w4**2 * w2 + w6**2 * w2 - w1 * w4 * w5 - w3 * w5 * w6,
            w4**2 * w3 + w5**2 * w3 - w1 * w4 * w6 - w2 * w5 * w6,
            w2**2 * w4 + w3**2 * w4 - w1 * w2 * w5 - w1 * w3 * w6,
            w1**2 * w5 + w3**2 * w5 - w1 * w2 * w4 - w2 * w3 * w6,
            w1**2 * w6 + w2**2 * w6 - w1 * w3 * w4 - w2 * w3 * w5,
        ],
        axis=-1,
    )


def hydro_flux_cross(w: np.ndarray) -> np.ndarray:
    """The same flux evaluated through double cross products."""
    w = np.asarray(w, dtype=float)
    A, B = w[..., :3], w[..., 3:]
    v = np.cross(A, B)
    return np.concatenate([np.cross(B, v), np.cross(v, A)], axis=-1)


def hydro_potential(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    v = np.cross(w[..., :3], w[..., 3:])
    return 0.5 * np.sum(v * v, axis=-1)


def hydro_jacobian(w: np.ndarray) -> np.ndarray:
    """Analytic 6x6 Jacobian ``J[i, j] = d a_i / d w_j``, shape ``(..., 6, 6)``."""
    w = np.asarray(w, dtype=float)
    A, B = w[..., :3], w[..., 3:]
    eye = np.eye(3)
    ab = np.sum(A * B, axis=-1)[..., None, None]
    aa = np.sum(A * A, axis=-1)[..., None, None]
    bb = np.sum(B * B, axis=-1)[..., None, None]
    outer = lambda u, v: u[..., :, None] * v[..., None, :]  # noqa: E731
    J = np.empty(w.shape[:-1] + (6, 6))
    J[..., :3, :3] = bb * eye - outer(B, B)
    J[..., :3, 3:] = 2 * outer(A, B) - ab * eye - outer(B, A)
    J[..., 3:, :3] = 2 * outer(B, A) - ab * eye - outer(A, B)
    J[..., 3:, 3:] = aa * eye - outer(A, A)
    return J


def hydro_flux_fields(gf, gg):
    """Flux on gradient fields: ``(gf, gg)`` are 3-tuples of arrays."""
    ab = gf[0] * gg[0] + gf[1] * gg[1] + gf[2] * gg[2]
    aa = gf[0] ** 2 + gf[1] ** 2 + gf[2] ** 2
    bb = gg[0] ** 2 + gg[1] ** 2 + gg[2] ** 2
    return (
        tuple(bb * gf[k] - ab * gg[k] for k in range(3)),
        tuple(aa * gg[k] - ab * gf[k] for k in range(3)),
    )


def hydro_jvp_fields(gf, gg, dgf, dgg):
    """``J_a(gf, gg) (dgf, dgg)`` on fields, without forming the 6x6 matrices."""
    ab = sum(gf[k] * gg[k] for k in range(3))
    aa = sum(gf[k] ** 2 for k in range(3))
    bb = sum(gg[k] ** 2 for k in range(3))
    d_ab = sum(dgf[k] * gg[k] + gf[k] * dgg[k] for k in range(3))
    d_aa = 2 * sum(gf[k] * dgf[k] for k in range(3))
    d_bb = 2 * sum(gg[k] * dgg[k] for k in range(3))
    da = tuple(d_bb * gf[k] + bb * dgf[k] - d_ab * gg[k] - ab * dgg[k] for k in range(3))
    db = tuple(d_aa * gg[k] + aa * dgg[k] - d_ab * gf[k] - ab * dgf[k] for k in range(3))
    return da, db


# ---------------------------------------------------------------------------
# background, boundary data, Bernoulli function
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Background:
    """Affine potentials ``f = grad_f . x``, ``g = grad_g . x``."""

    grad_f: tuple[float, float, float] = (0.0, 1.0, 0.0)
    grad_g: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "grad_f", tuple(float(v) for v in self.grad_f))
        object.__setattr__(self, "grad_g", tuple(float(v) for v in self.grad_g))
        if len(self.grad_f) != 3 or len(self.grad_g) != 3:
            raise ConfigurationError("background gradients must have 3 components")
        if self.velocity[0] == 0.0:
            raise ConfigurationError("background velocity must have a nonzero first component")

    @property
    def velocity(self) -> tuple[float, float, float]:
        return tuple(float(c) for c in np.cross(self.grad_f, self.grad_g))

    def periods(self, extents) -> tuple[tuple[float, float], tuple[float, float]]:
        """Vectorial periods of ``grad H`` induced by the lattice ``(P_y, P_z)``."""
        _, py, pz = extents
        return (
            (py * self.grad_f[1], py * self.grad_g[1]),
            (pz * self.grad_f[2], pz * self.grad_g[2]),
        )

    def f(self, grid: Grid) -> np.ndarray:
        x, y, z = grid.mesh
        return self.grad_f[0] * x + self.grad_f[1] * y + self.grad_f[2] * z

    def g(self, grid: Grid) -> np.ndarray:
        x, y, z = grid.mesh
        return self.grad_g[0] * x + self.grad_g[1] * y + self.grad_g[2] * z


@dataclass(frozen=True)
class BoundaryData:
    """Periodic parts ``df = f0 - fbar``, ``dg = g0 - gbar`` of the boundary data, sampled on a grid."""

    grid: Grid
    df: np.ndarray
    dg: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        for a in (self.df, self.dg):
            if np.shape(a) != self.grid.shape:
                raise ConfigurationError("boundary data must be sampled on the problem grid")
            if not np.all(np.isfinite(a)):
                raise ConfigurationError("boundary data must be finite")

    @classmethod
    def unperturbed(cls, grid: Grid) -> "BoundaryData":
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape), "unperturbed")

    @classmethod
    def from_functions(cls, grid: Grid, df: Callable, dg: Callable, name: str = "custom") -> "BoundaryData":
        ones = np.ones(grid.shape)
        return cls(grid, df(*grid.mesh) * ones, dg(*grid.mesh) * ones, name)

    def perturbation_size(self, s: int = 6) -> float:
        """``H^s`` surrogate of ``(grad f0 - grad fbar, grad g0 - grad gbar)``."""
        total = 0.0
        for comp in self.grid.gradient(self.df) + self.grid.gradient(self.dg):
            total += self.grid.sobolev_norm(comp, s) ** 2
        return float(np.sqrt(total))


@dataclass(frozen=True)
class BernoulliFn:
    """``H(u, v)`` with gradient ``(H_u, H_v)`` and Hessian ``(H_uu, H_uv, H_vv)``."""

    name: str
    value: Callable
    grad: Callable
    hess: Callable
    params: dict = field(default_factory=dict)

    @property
    def is_zero(self) -> bool:
        return self.name == "zero"


def zero_bernoulli() -> BernoulliFn:
    z = lambda u, v: 0.0 * u  # noqa: E731
    return BernoulliFn("zero", z, lambda u, v: (0.0 * u, 0.0 * u), lambda u, v: (0.0 * u, 0.0 * u, 0.0 * u))


def linear_bernoulli(cu: float = 0.0, cv: float = 0.0) -> BernoulliFn:
    return BernoulliFn(
        "linear",
        lambda u, v: cu * u + cv * v,
        lambda u, v: (cu + 0.0 * u, cv + 0.0 * u),
        lambda u, v: (0.0 * u, 0.0 * u, 0.0 * u),
        {"cu": cu, "cv": cv},
    )


def quadratic_bernoulli(c: float = 0.001) -> BernoulliFn:
    """``H = c (u^2 + v^2)``.  Its gradient is not periodic on any nondegenerate lattice."""
    return BernoulliFn(
        "quadratic",
        lambda u, v: c * (u * u + v * v),
        lambda u, v: (2 * c * u, 2 * c * v),
        lambda u, v: (2 * c + 0.0 * u, 0.0 * u, 2 * c + 0.0 * u),
        {"c": c},
    )


def lattice_bernoulli(background: Background, extents, amplitude: float = 1e-3, mode=(1, 0)) -> BernoulliFn:
    """``H = amplitude * cos(2 pi k . M^{-1} (u, v))`` with ``M`` the period matrix.

    Both ``H`` and ``grad H`` are invariant under the two vectorial periods.
    """
    p1, p2 = background.periods(extents)
    M = np.array([[p1[0], p2[0]], [p1[1], p2[1]]])
    Minv = np.linalg.inv(M)
    k = np.asarray(mode, dtype=float)
    cu, cv = 2 * np.pi * (k @ Minv)

    def phase(u, v):
        return cu * u + cv * v

    return BernoulliFn(
        "lattice",
        lambda u, v: amplitude * np.cos(phase(u, v)),
        lambda u, v: (-amplitude * cu * np.sin(phase(u, v)), -amplitude * cv * np.sin(phase(u, v))),
        lambda u, v: tuple(
            -amplitude * c * np.cos(phase(u, v)) for c in (cu * cu, cu * cv, cv * cv)
        ),
        {"amplitude": amplitude, "mode": list(mode)},
    )


def bernoulli_check(
    H: BernoulliFn, background: Background, extents, samples: int = 200, seed: int = 0, box: float = 4.0,
    tol: float = 1e-12,
) -> dict:
    """Periodicity defect of ``grad H`` under both vectorial periods, and ``sup |grad H|`` on a box."""
    rng = np.random.default_rng(seed)
    u = rng.uniform(-box, box, samples)
    v = rng.uniform(-box, box, samples)
    gu, gv = H.grad(u, v)
    defect = 0.0
    for p in background.periods(extents):
        su, sv = H.grad(u + p[0], v + p[1])
        defect = max(defect, float(np.max(np.hypot(su - gu, sv - gv))))
    scale = max(1.0, float(np.max(np.hypot(gu, gv))))
    return {
        "periodicity_defect": defect,
        "sup_grad": float(np.max(np.hypot(gu, gv))),
        "admissible": bool(defect <= tol * scale),
        "samples": int(samples),
    }


def euler_flux_identity_defect(gf, gg) -> float:
    """Compare the flux on ``(grad f, grad g)`` with ``(grad g x v, v x grad f)``, ``v = grad f x grad g``."""
    a, b = hydro_flux_fields(gf, gg)
    v = cross(gf, gg)
    ca, cb = cross(gg, v), cross(v, gf)
    return max(float(np.max(np.abs(x - y))) for x, y in zip(a + b, ca + cb))
