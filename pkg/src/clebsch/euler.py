"""Steady Euler flows ``v = grad f x grad g`` on the slab as minimizers.

Unknowns are the Dirichlet corrections ``(F, G)``:
``f = fbar + df + F`` and ``g = gbar + dg + G``, with ``fbar``, ``gbar``
affine and ``df``, ``dg`` the periodic parts of the boundary data.  The
discrete functional is

    J(F, G) = sum_nodes w * (|grad f x grad g|^2 / 2 + H(f, g)).

Gradients of ``f`` split into the constant background part and the
spectral/SBP gradient of the periodic remainder, so nothing non-periodic
is ever differentiated with Fourier methods.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .flux import (
    Background,
    BernoulliFn,
    BoundaryData,
    ConfigurationError,
    bernoulli_check,
    hydro_flux_fields,
    hydro_jacobian,
    hydro_jvp_fields,
    hydro_potential,
    lattice_bernoulli,
    zero_bernoulli,
)
from .grid import Grid, cross, dot
from .lab import RandomFieldSampler
from .precond import SlabPreconditioner
from .solver import Objective, SolveOptions, SolveReport, minimize


@dataclass
class ClebschState:
    F: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        for name, a in (("F", self.F), ("G", self.G)):
            if np.any(a[0] != 0) or np.any(a[-1] != 0):
                raise ConfigurationError(f"{name} must vanish on the Dirichlet planes")


@dataclass
class FlowFields:
    velocity: tuple
    pressure: np.ndarray
    divergence: np.ndarray
    momentum: tuple
    f: np.ndarray
    g: np.ndarray


@dataclass
class EulerProblem(Objective):
    grid: Grid
    background: Background = field(default_factory=Background)
    boundary: BoundaryData | None = None
    bernoulli: BernoulliFn = field(default_factory=zero_bernoulli)
    radius: float = 1.0
    norm_order: int = 5
    precond: str = "reference"
    _pc: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        g = self.grid
        if g.dim != 3:
            raise ConfigurationError("the Euler problem lives on a 3D grid")
        if self.boundary is None:
            self.boundary = BoundaryData.unperturbed(g)
        if self.boundary.grid != g:
            raise ConfigurationError("boundary data sampled on a different grid")
        if self.precond not in ("reference", "laplacian", "none"):
            raise ConfigurationError(f"unknown preconditioner {self.precond!r}")
        wi = g.weights[g.interior].reshape(-1)
        self.weights = np.concatenate([wi, wi])
        self._fbar = self.background.f(g)
        self._gbar = self.background.g(g)
        self._m = wi.size
        if self.precond != "none":
            self._pc = self._build_preconditioner()

    # -- state plumbing --------------------------------------------------------------

    def split(self, x):
        g = self.grid
        return g.embed(x[: self._m]), g.embed(x[self._m:])

    def join(self, F, G):
        g = self.grid
        return np.concatenate([np.asarray(F)[g.interior].reshape(-1), np.asarray(G)[g.interior].reshape(-1)])

    def zero_state(self):
        return np.zeros(2 * self._m)

    def potentials(self, x):
        """Full ``(f, g)`` values and their gradients."""
        F, G = self.split(x)
        pf = self.boundary.df + F
        pg = self.boundary.dg + G
        gf = tuple(c + d for c, d in zip(self.background.grad_f, self.grid.gradient(pf)))
        gg = tuple(c + d for c, d in zip(self.background.grad_g, self.grid.gradient(pg)))
        return self._fbar + pf, self._gbar + pg, gf, gg

    # -- objective ---------------------------------------------------------------------

    def value(self, x):
        f, g, gf, gg = self.potentials(x)
        v = cross(gf, gg)
        dens = 0.5 * dot(v, v)
        if not self.bernoulli.is_zero:
            dens = dens + self.bernoulli.value(f, g)
        return self.grid.integrate(dens)

    def gradient(self, x):
        grid = self.grid
        f, g, gf, gg = self.potentials(x)
        aA, aB = hydro_flux_fields(gf, gg)
        rF = -grid.divergence_adjoint(aA)
        rG = -grid.divergence_adjoint(aB)
        if not self.bernoulli.is_zero:
            hu, hv = self.bernoulli.grad(f, g)
            rF = rF + hu
            rG = rG + hv
        return self.join(rF, rG)

    def hessian_apply(self, x, d):
        grid = self.grid
        f, g, gf, gg = self.potentials(x)
        dF, dG = self.split(d)
        dA, dB = hydro_jvp_fields(gf, gg, grid.gradient(dF), grid.gradient(dG))
        rF = -grid.divergence_adjoint(dA)
        rG = -grid.divergence_adjoint(dB)
        if not self.bernoulli.is_zero:
            huu, huv, hvv = self.bernoulli.hess(f, g)
            rF = rF + huu * dF + huv * dG
            rG = rG + huv * dF + hvv * dG
        return self.join(rF, rG)

    def state_norm(self, x):
        """``H^s`` surrogate of ``(F, G)`` (sum over both fields of squared seminorms)."""
        F, G = self.split(x)
        return math.sqrt(self.grid.sobolev_norm(F, self.norm_order) ** 2 + self.grid.sobolev_norm(G, self.norm_order) ** 2)

    # -- preconditioning --------------------------------------------------------------

    def _build_preconditioner(self):
        if self.precond == "laplacian":
            cx = np.eye(2)
            cp = np.zeros((2, 2, 2, 2))
            cp[0, 0] = cp[1, 1] = np.eye(2)
            return SlabPreconditioner(self.grid, cx, cp)
        J = hydro_jacobian(np.array(self.background.grad_f + self.background.grad_g))
        blocks = [[J[:3, :3], J[:3, 3:]], [J[3:, :3], J[3:, 3:]]]
        cx = np.array([[blocks[a][b][0, 0] for b in range(2)] for a in range(2)])
        cp = np.array([[blocks[a][b][1:, 1:] for b in range(2)] for a in range(2)])
        # exact symbol: sum_ij C_ij k_i k_j only sees the symmetric part in (i, j)
        cp = 0.5 * (cp + np.swapaxes(cp, -1, -2))
        return SlabPreconditioner(self.grid, cx, cp)

    def precondition(self, r):
        return r if self._pc is None else self._pc(r)


# ---------------------------------------------------------------------------------------


def euler_functional(pb: EulerProblem, state: ClebschState) -> float:
    return pb.value(pb.join(state.F, state.G))


def euler_gradient(pb: EulerProblem, state: ClebschState) -> ClebschState:
    return ClebschState(*pb.split(pb.gradient(pb.join(state.F, state.G))))


def euler_hessian_apply(pb: EulerProblem, state: ClebschState, dstate: ClebschState) -> ClebschState:
    r = pb.hessian_apply(pb.join(state.F, state.G), pb.join(dstate.F, dstate.G))
    return ClebschState(*pb.split(r))


def flow_fields(pb: EulerProblem, x) -> FlowFields:
    """Velocity, pressure and the two Euler residual fields."""
    grid = pb.grid
    f, g, gf, gg = pb.potentials(x)
    v = cross(gf, gg)
    speed2 = dot(v, v)
    H = pb.bernoulli.value(f, g) if not pb.bernoulli.is_zero else np.zeros(grid.shape)
    p = -0.5 * speed2 + H
    # v is periodic, so |v|^2 can be differentiated spectrally; grad H(f, g) via the chain rule
    grad_p = tuple(-0.5 * c for c in grid.gradient(speed2))
    if not pb.bernoulli.is_zero:
        hu, hv = pb.bernoulli.grad(f, g)
        grad_p = tuple(gp + hu * a + hv * b for gp, a, b in zip(grad_p, gf, gg))
    dv = [grid.gradient(vi) for vi in v]
    advect = tuple(sum(v[j] * dv[i][j] for j in range(3)) for i in range(3))
    momentum = tuple(a + b for a, b in zip(advect, grad_p))
    return FlowFields(v, p, grid.divergence(v), momentum, f, g)


def euler_residual(pb: EulerProblem, x) -> dict:
    ff = flow_fields(pb, x)
    grid = pb.grid
    mom = math.sqrt(sum(grid.inner(c, c) for c in ff.momentum))
    return {
        "momentum_l2": mom,
        "divergence_l2": grid.l2_norm(ff.divergence),
        "pressure": ff.pressure,
    }


def euler_solve(pb: EulerProblem, opts: SolveOptions | None = None, x0=None,
                ) -> tuple[np.ndarray, SolveReport, FlowFields, dict]:
    """Minimize from ``x0`` (default 0).  Returns ``(x, report, flow, diagnostics)``."""
    ext = pb.grid.extents
    bchk = bernoulli_check(pb.bernoulli, pb.background, ext)
    if not bchk["admissible"]:
        raise ConfigurationError(
            f"Bernoulli function {pb.bernoulli.name!r} is not compatible with the lattice periods "
            f"(defect {bchk['periodicity_defect']:.3e})"
        )
    opts = opts or SolveOptions(radius=pb.radius)
    x0 = pb.zero_state() if x0 is None else np.asarray(x0, dtype=float)
    x, rep = minimize(pb, x0, opts)
    diag = {"bernoulli": bchk, "perturbation_size": pb.boundary.perturbation_size()}
    return x, rep, flow_fields(pb, x), diag


# ---------------------------------------------------------------------------------------
# quadratic-form lower bounds


def _unit_pair(grid, F, G):
    n = math.sqrt(grid.inner(F, F) + grid.inner(G, G))
    return F / n, G / n


def quadratic_bound_check(pb: EulerProblem, x=None, samples: int = 100, seed: int = 0,
                          max_modes=(4, 3, 3)) -> dict:
    """Check two lower bounds on random Dirichlet pairs ``(F, G)`` of unit L2 norm.

    ``pointwise``: at the potentials ``(f, g)`` of state ``x``, the quadratic form
    ``[[|g_yz|^2, -f_yz.g_yz], [., |f_yz|^2]]`` dominates
    ``v1^2 / (|f_yz|^2 + |g_yz|^2)`` times the identity; reported as the
    smallest integrated margin, plus the nodal defect of
    ``v1^2 = |f_yz|^2 |g_yz|^2 - (f_yz.g_yz)^2``.

    ``affine``: at the affine background with ``H = 0`` the Hessian form
    ``B((F, G), (F, G))`` dominates
    ``(2|grad fbar|^2 + 2|grad gbar|^2)^(-1) * int (vbar.grad F)^2/16 + (vbar.grad G)^2/16
    + pi^2 vbar1^2 / (32 L^2) (F^2 + G^2)``.
    """
    grid = pb.grid
    x = pb.zero_state() if x is None else x
    _, _, gf, gg = pb.potentials(x)
    fyz, gyz = gf[1:], gg[1:]
    ff, gg2, fg = dot(fyz, fyz), dot(gyz, gyz), dot(fyz, gyz)
    v1 = fyz[0] * gyz[1] - fyz[1] * gyz[0]
    identity_defect = float(np.max(np.abs(v1 * v1 - (ff * gg2 - fg * fg))))
    low = v1 * v1 / (ff + gg2)

    bg = pb.background
    vbar = bg.velocity
    affine = EulerProblem(grid, bg, precond="none")
    x0 = affine.zero_state()
    gfn = float(np.dot(bg.grad_f, bg.grad_f))
    ggn = float(np.dot(bg.grad_g, bg.grad_g))
    c0 = 1.0 / (2 * gfn + 2 * ggn)
    L = grid.extents[0]

    sampler = RandomFieldSampler(grid, seed=seed, max_modes=max_modes)
    fields = sampler.sample(2 * samples, stream=7)
    pw_margins, af_margins = [], []
    for i in range(samples):
        F, G = _unit_pair(grid, fields[2 * i], fields[2 * i + 1])
        q = gg2 * F * F - 2 * fg * F * G + ff * G * G
        pw_margins.append(grid.integrate(q) - grid.integrate(low * (F * F + G * G)))

        d = affine.join(F, G)
        B = affine.inner(d, affine.hessian_apply(x0, d))
        vF = dot(vbar, grid.gradient(F))
        vG = dot(vbar, grid.gradient(G))
        rhs = c0 * grid.integrate(vF * vF / 16 + vG * vG / 16 + math.pi**2 * vbar[0] ** 2 / (32 * L**2) * (F * F + G * G))
        af_margins.append(B - rhs)
    return {
        "pointwise_min_margin": float(min(pw_margins)),
        "identity_defect": identity_defect,
        "affine_min_margin": float(min(af_margins)),
        "samples": samples,
        "seed": seed,
    }


# ---------------------------------------------------------------------------------------
# scenario catalog


def _perturbed(grid, eps, kind):
    L, _, Pz = grid.extents
    if kind == "perturbed":
        return BoundaryData.from_functions(
            grid,
            lambda x, y, z: eps * np.cos(np.pi * x / L) * np.cos(2 * np.pi * z / Pz),
            lambda x, y, z: 0.0 * x,
            f"perturbed(eps={eps})",
        )
    raise ConfigurationError(kind)


def make_scenario(name: str, grid: Grid, eps: float = 1e-2, amplitude: float = 1e-3, **kw) -> EulerProblem:
    """Catalog problems on the background ``f = y``, ``g = z``.

    ``unperturbed``: boundary data equal to the background, ``H = 0``.
    ``perturbed``: ``f0 = y + eps cos(pi x / L) cos(2 pi z / P_z)``, ``g0 = z``, ``H = 0``.
    ``bernoulli``: the perturbed data with a small lattice-periodic ``H``.
    """
    bg = Background()
    if name == "unperturbed":
        return EulerProblem(grid, bg, BoundaryData.unperturbed(grid), **kw)
    if name == "perturbed":
        return EulerProblem(grid, bg, _perturbed(grid, eps, "perturbed"), **kw)
    if name == "bernoulli":
        H = lattice_bernoulli(bg, grid.extents, amplitude=amplitude, mode=(1, 0))
        return EulerProblem(grid, bg, _perturbed(grid, eps, "perturbed"), H, **kw)
    raise ConfigurationError(f"unknown scenario {name!r}; known: ['bernoulli', 'perturbed', 'unperturbed']")


SCENARIOS = ("unperturbed", "perturbed", "bernoulli")
