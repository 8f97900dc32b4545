"""The 2D quasilinear problem ``div a(x, grad u) = h`` as a discrete convex objective.

The discrete functional is ``J(u) = sum_nodes w * (Gamma(x, grad_h u) + h u)``
over interior unknowns (Dirichlet planes pinned to zero).  Its gradient,
taken as a representer in the quadrature inner product, is
``-div_h a(x, grad_h u) + h`` where ``div_h`` is minus the adjoint of
``grad_h``; this makes the gradient exact for the discrete value.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .flux import ConfigurationError, ToyFlux, toy_check_hypotheses
from .grid import Grid
from .precond import SlabPreconditioner
from .solver import Objective, SolveOptions, SolveReport, minimize


@dataclass
class ToyProblem(Objective):
    grid: Grid
    flux: ToyFlux
    rhs: np.ndarray
    exact_solution: np.ndarray | None = None
    norm_order: int = 3
    precond: str = "reference"
    _pc: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        g = self.grid
        if g.dim != 2:
            raise ConfigurationError("the toy problem lives on a 2D grid")
        if self.flux.potential is None:
            raise ConfigurationError(f"flux {self.flux.name!r} has no potential; the variational solver needs one")
        self.rhs = np.broadcast_to(np.asarray(self.rhs, dtype=float), g.shape).copy()
        if not np.all(np.isfinite(self.rhs)):
            raise ConfigurationError("right-hand side must be finite")
        if self.exact_solution is not None:
            u = np.asarray(self.exact_solution, dtype=float)
            if u.shape != g.shape or np.any(u[0] != 0) or np.any(u[-1] != 0):
                raise ConfigurationError("exact solution must vanish on the Dirichlet planes")
        if self.precond not in ("reference", "laplacian", "none"):
            raise ConfigurationError(f"unknown preconditioner {self.precond!r}")
        self.weights = g.weights[g.interior].reshape(-1).copy()
        self._x1, self._x2 = g.mesh

    # -- state plumbing --------------------------------------------------------------

    def field(self, x: np.ndarray) -> np.ndarray:
        return self.grid.embed(x)

    def state(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u, dtype=float)[self.grid.interior].reshape(-1).copy()

    def zero_state(self) -> np.ndarray:
        return np.zeros(self.weights.size)

    # -- objective ---------------------------------------------------------------------

    def _flux_at(self, u):
        z1, z2 = self.grid.gradient(u)
        return z1, z2

    def value(self, x):
        u = self.field(x)
        z1, z2 = self._flux_at(u)
        dens = self.flux.potential(self._x1, self._x2, z1, z2) + self.rhs * u
        return self.grid.integrate(dens)

    def gradient(self, x):
        u = self.field(x)
        z1, z2 = self._flux_at(u)
        a1, a2 = self.flux.flux(self._x1, self._x2, z1, z2)
        r = -self.grid.divergence_adjoint((a1, a2)) + self.rhs
        return r[self.grid.interior].reshape(-1)

    def hessian_apply(self, x, d):
        g = self.grid
        z1, z2 = self._flux_at(self.field(x))
        v1, v2 = g.gradient(self.field(d))
        j11, j12, j21, j22 = self.flux.jacobian(self._x1, self._x2, z1, z2)
        q1 = j11 * v1 + 0.5 * (j12 + j21) * v2
        q2 = 0.5 * (j12 + j21) * v1 + j22 * v2
        return (-g.divergence_adjoint((q1, q2)))[g.interior].reshape(-1)

    def residual(self, x) -> float:
        """``||-div_h a(x, grad u) + h||`` over interior nodes."""
        return self.norm(self.gradient(x))

    def state_norm(self, x):
        return self.grid.sobolev_norm(self.field(x), self.norm_order)

    # -- preconditioning --------------------------------------------------------------

    def prepare(self, x):
        if self.precond == "none":
            self._pc = None
            return
        if self.precond == "laplacian":
            cx, cp = np.eye(1), np.ones((1, 1, 1, 1))
        else:
            z1, z2 = self._flux_at(self.field(x))
            j11, j12, j21, j22 = self.flux.jacobian(self._x1, self._x2, z1, z2)
            w = self.grid.weights / self.grid.volume
            m11 = float(np.sum(w * j11))
            m22 = float(np.sum(w * j22))
            # keep the periodic symbol positive on the degenerate set
            m22 = max(m22, 1e-3 * max(m11, 1e-300))
            cx, cp = np.array([[m11]]), np.array([[[[m22]]]])
        self._pc = SlabPreconditioner(self.grid, cx, cp)

    def precondition(self, r):
        return r if self._pc is None else self._pc(r)


# ---------------------------------------------------------------------------------------


def toy_functional(pb: ToyProblem, u: np.ndarray) -> float:
    return pb.value(pb.state(u))


def toy_gradient(pb: ToyProblem, u: np.ndarray) -> np.ndarray:
    """Gradient representer as a full-grid field (zero on the Dirichlet planes)."""
    return pb.field(pb.gradient(pb.state(u)))


def toy_hessian_apply(pb: ToyProblem, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return pb.field(pb.hessian_apply(pb.state(u), pb.state(v)))


def manufactured_rhs(grid: Grid, flux: ToyFlux, u_star: np.ndarray) -> np.ndarray:
    """``h = div_h a(x, grad_h u*)``, making ``u*`` an exact discrete critical point."""
    u_star = np.asarray(u_star, dtype=float)
    if np.any(u_star[0] != 0) or np.any(u_star[-1] != 0):
        raise ConfigurationError("u* must vanish on the Dirichlet planes")
    x1, x2 = grid.mesh
    z1, z2 = grid.gradient(u_star)
    a = flux.flux(x1, x2, z1, z2)
    h = grid.divergence_adjoint(a)
    h[0] = 0.0
    h[-1] = 0.0
    return h


def toy_solve(pb: ToyProblem, opts: SolveOptions | None = None, x0=None, hypothesis_samples: int = 256,
              seed: int = 0) -> tuple[np.ndarray, SolveReport, dict]:
    """Minimize the toy functional from ``x0`` (default 0).

    The flux hypotheses are sampled first and a violation raises
    :class:`ConfigurationError`.  Returns ``(u, report, hypotheses)`` with
    ``u`` on the full grid.
    """
    hyp = toy_check_hypotheses(pb.flux, pb.grid, hypothesis_samples, seed=seed)
    if hyp["min_coercivity_margin"] < -1e-12 or hyp["symmetry_defect"] > 1e-6 or hyp["origin_defect"] > 1e-12:
        raise ConfigurationError(f"flux {pb.flux.name!r} violates its structural hypotheses: {hyp}")
    x0 = pb.zero_state() if x0 is None else np.asarray(x0, dtype=float)
    x, rep = minimize(pb, x0, opts)
    return pb.field(x), rep, hyp


# ---------------------------------------------------------------------------------------
# assembled operators (used as independent oracles)


def fourier_diff_matrix(n: int, period: float) -> np.ndarray:
    """Dense periodic spectral differentiation matrix, Nyquist mode dropped for even ``n``."""
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    j = np.arange(n)
    phase = np.exp(2j * np.pi * np.outer(j, k) / n)
    F = phase / n
    # D = F diag(i k 2pi/P) F^{-1}, with F^{-1}[k, m] = exp(-2 pi i k m / n)
    Finv = np.exp(-2j * np.pi * np.outer(k, j) / n)
    D = (F * (1j * 2 * np.pi * k / period)[None, :]) @ Finv
    return D.real


def assembled_linear_operator(grid: Grid, M) -> tuple[sp.csr_matrix, np.ndarray]:
    """Stiffness ``K`` (interior rows/cols) for ``a(z) = M z``: ``K = G^T W M G``.

    Returns ``(K, w)`` with ``w`` the interior quadrature weights, so the
    minimizer of ``x^T K x / 2 + w h . x`` solves ``K x = -w h``.
    """
    n0, n1 = grid.counts
    D0 = sp.csr_matrix(grid.d0)
    D1 = sp.csr_matrix(fourier_diff_matrix(n1, grid.extents[1]))
    Gx = sp.kron(D0, sp.identity(n1), format="csr")
    Gy = sp.kron(sp.identity(n0), D1, format="csr")
    mask = np.zeros(grid.shape, dtype=bool)
    mask[grid.interior] = True
    cols = np.flatnonzero(mask.reshape(-1))
    Gx, Gy = Gx[:, cols], Gy[:, cols]
    W = sp.diags(grid.weights.reshape(-1))
    M = np.asarray(M, dtype=float)
    K = (
        Gx.T @ W @ (M[0, 0] * Gx + M[0, 1] * Gy)
        + Gy.T @ W @ (M[1, 0] * Gx + M[1, 1] * Gy)
    )
    return K.tocsc(), grid.weights.reshape(-1)[cols]


def direct_linear_solve(grid: Grid, M, h: np.ndarray) -> np.ndarray:
    """Sparse direct solve of the discrete linear problem; returns the full-grid field."""
    K, w = assembled_linear_operator(grid, M)
    hi = np.asarray(h, dtype=float)[grid.interior].reshape(-1)
    x = spla.spsolve(K, -w * hi)
    return grid.embed(x)
