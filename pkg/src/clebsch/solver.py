"""Matrix-free Newton-CG minimization of discrete functionals.

States are flat vectors.  Every objective carries positive ``weights`` that
define the inner product ``<x, y> = sum(weights * x * y)``; ``gradient`` and
``hessian_apply`` return representers in that inner product, so the Newton
system ``H p = -g`` is self-adjoint for it and is solved by preconditioned CG
in the same inner product.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np


class NonFiniteObjective(FloatingPointError):
    """The functional evaluated to NaN/Inf; ``state`` holds the offending point."""

    def __init__(self, message: str, state: np.ndarray):
        super().__init__(message)
        self.state = state


class Objective:
    """Interface for :func:`minimize`.

    Subclasses set ``weights`` and implement ``value``, ``gradient`` and
    ``hessian_apply``.  ``precondition`` should approximate the inverse
    Hessian and be self-adjoint and positive in the weighted inner product.
    """

    weights: np.ndarray

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian_apply(self, x: np.ndarray, d: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def precondition(self, r: np.ndarray) -> np.ndarray:
        return r

    def prepare(self, x: np.ndarray) -> None:
        """Called once per outer iteration before CG; refresh state-dependent preconditioners here."""

    def state_norm(self, x: np.ndarray) -> float:
        """Norm monitored against the ball radius; defaults to the weighted L2 norm."""
        return self.norm(x)

    def inner(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.dot(self.weights * x, y))

    def norm(self, x: np.ndarray) -> float:
        return math.sqrt(max(self.inner(x, x), 0.0))

    @property
    def size(self) -> int:
        return self.weights.size


class QuadraticObjective(Objective):
    """``J(x) = <x, K x>/2 - <b, x>`` in the weighted inner product (``K`` self-adjoint)."""

    def __init__(self, K, b, weights=None, preconditioner=None):
        self.K = K
        self.b = np.asarray(b, dtype=float)
        self.weights = np.ones_like(self.b) if weights is None else np.asarray(weights, dtype=float)
        self._prec = preconditioner

    def _apply(self, x):
        return self.K @ x

    def value(self, x):
        return 0.5 * self.inner(x, self._apply(x)) - self.inner(self.b, x)

    def gradient(self, x):
        return self._apply(x) - self.b

    def hessian_apply(self, x, d):
        return self._apply(d)

    def precondition(self, r):
        return r if self._prec is None else self._prec(r)


@dataclass
class SolveOptions:
    grad_tol: float = 1e-10
    max_newton: int = 30
    max_cg: int = 500
    cg_rtol: float = 1e-6
    armijo_c1: float = 1e-4
    backtrack: float = 0.5
    max_halvings: int = 40
    radius: float = 1.0
    curvature_tol: float = 1e-14

    def __post_init__(self):
        for name in ("grad_tol", "cg_rtol", "armijo_c1", "radius", "curvature_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack must lie in (0, 1)")
        if self.max_newton < 0 or self.max_cg < 1:
            raise ValueError("iteration limits must be positive")


@dataclass
class IterationRecord:
    iteration: int
    value: float
    grad_norm: float
    step: float
    cg_iterations: int
    direction: str = "newton"


@dataclass
class SolveReport:
    converged: bool = False
    iterations: int = 0
    history: list = field(default_factory=list)
    final_value: float = float("nan")
    final_grad_norm: float = float("nan")
    state_norm: float = float("nan")
    radius: float = float("nan")
    ball_excursion: bool = False
    min_rayleigh: float = float("inf")
    negative_curvature_steps: int = 0
    message: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        if not math.isfinite(d["min_rayleigh"]):
            d["min_rayleigh"] = None
        return d

    def log_lines(self) -> list[str]:
        lines = ["iter  J                        |g|          step      cg  dir"]
        for r in self.history:
            lines.append(
                f"{r.iteration:4d}  {r.value:+.16e}  {r.grad_norm:.4e}  {r.step:.2e}  {r.cg_iterations:4d}  {r.direction}"
            )
        return lines

    def jsonl_lines(self) -> list[str]:
        return [json.dumps(asdict(r), sort_keys=True) for r in self.history]


def pcg(obj: Objective, x: np.ndarray, g: np.ndarray, rtol: float, maxiter: int, curvature_tol: float):
    """Preconditioned CG for ``H p = -g`` in the weighted inner product.

    Returns ``(p, iterations, min_rayleigh, hit_nonpositive_curvature)``.
    Stops on ``d^T H d <= curvature_tol * |d|^2`` and returns the current iterate.
    """
    p = np.zeros_like(g)
    r = -g
    z = obj.precondition(r)
    d = z.copy()
    rz = obj.inner(r, z)
    r0 = obj.norm(r)
    min_rq = math.inf
    if r0 == 0.0:
        return p, 0, min_rq, False
    for it in range(1, maxiter + 1):
        Hd = obj.hessian_apply(x, d)
        dHd = obj.inner(d, Hd)
        dd = obj.inner(d, d)
        if dd > 0:
            min_rq = min(min_rq, dHd / dd)
        if dHd <= curvature_tol * dd:
            return p, it, min_rq, True
        alpha = rz / dHd
        p = p + alpha * d
        r = r - alpha * Hd
        if obj.norm(r) <= rtol * r0:
            return p, it, min_rq, False
        z = obj.precondition(r)
        rz_new = obj.inner(r, z)
        d = z + (rz_new / rz) * d
        rz = rz_new
    return p, maxiter, min_rq, False


def _value(obj, x):
    J = obj.value(x)
    if not math.isfinite(J):
        raise NonFiniteObjective(f"functional is {J}", x.copy())
    return J


def minimize(obj: Objective, x0: np.ndarray, opts: SolveOptions | None = None) -> tuple[np.ndarray, SolveReport]:
    """Truncated Newton-CG with Armijo backtracking.

    Converged when the weighted L2 norm of the gradient is ``<= opts.grad_tol``.
    When CG meets non-positive curvature before making progress the outer step
    falls back to steepest descent.  When the predicted decrease is below the
    rounding level of ``J`` the Armijo test is replaced by a decrease of the
    gradient norm.
    """
    opts = opts or SolveOptions()
    x = np.array(x0, dtype=float, copy=True)
    rep = SolveReport(radius=opts.radius)
    J = _value(obj, x)
    g = obj.gradient(x)
    gnorm = obj.norm(g)
    g0 = gnorm
    rep.history.append(IterationRecord(0, J, gnorm, 0.0, 0, "start"))
    it = 0
    while True:
        if gnorm <= opts.grad_tol:
            rep.converged = True
            rep.message = "gradient tolerance met"
            break
        if it >= opts.max_newton:
            rep.message = "maximum Newton iterations reached"
            break
        it += 1
        obj.prepare(x)
        eta = min(opts.cg_rtol, math.sqrt(gnorm / g0)) if g0 > 0 else opts.cg_rtol
        p, cg_it, rq, neg = pcg(obj, x, g, eta, opts.max_cg, opts.curvature_tol)
        rep.min_rayleigh = min(rep.min_rayleigh, rq)
        direction = "newton"
        if neg:
            rep.negative_curvature_steps += 1
        gp = obj.inner(g, p)
        if neg or not np.any(p) or gp >= 0:
            p = -g
            gp = -gnorm * gnorm
            direction = "steepest"

        t = 1.0
        noise = 64 * np.finfo(float).eps * max(abs(J), 1.0)
        accepted = False
        for _ in range(opts.max_halvings + 1):
            x_new = x + t * p
            J_new = _value(obj, x_new)
            if J_new <= J + opts.armijo_c1 * t * gp:
                accepted = True
                g_new = obj.gradient(x_new)
                break
            if abs(t * gp) <= noise and J_new <= J + noise:
                g_new = obj.gradient(x_new)
                if obj.norm(g_new) < gnorm:
                    accepted = True
                    direction += "*"
                    break
            t *= opts.backtrack
        if not accepted:
            rep.history.append(IterationRecord(it, J, gnorm, 0.0, cg_it, direction))
            rep.message = "line search failed"
            break
        x, J, g = x_new, J_new, g_new
        gnorm = obj.norm(g)
        rep.history.append(IterationRecord(it, J, gnorm, t, cg_it, direction))

    rep.iterations = it
    rep.final_value = J
    rep.final_grad_norm = gnorm
    rep.state_norm = obj.state_norm(x)
    rep.ball_excursion = bool(rep.state_norm > opts.radius)
    return x, rep


def gradient_check(obj: Objective, x: np.ndarray, directions: int = 5, seed: int = 0,
                   steps=(1e-4, 1e-5, 1e-6)) -> float:
    """Relative defect between ``<gradient, d>`` and central differences of ``value``.

    For each step the defect is the maximum over random unit directions of
    ``|fd - <g, d>| / (|g| |d|)``; the minimum over steps is returned.  When
    the gradient vanishes the absolute defect is returned.
    """
    rng = np.random.default_rng(seed)
    g = obj.gradient(x)
    scale = obj.norm(g)
    dirs = []
    for _ in range(directions):
        d = rng.standard_normal(x.shape)
        dirs.append(d / obj.norm(d))
    best = math.inf
    for eps in steps:
        worst = 0.0
        for d in dirs:
            fd = (obj.value(x + eps * d) - obj.value(x - eps * d)) / (2 * eps)
            an = obj.inner(g, d)
            worst = max(worst, abs(fd - an) / (scale if scale > 0 else 1.0))
        best = min(best, worst)
    return best


def hessian_symmetry_defect(obj: Objective, x: np.ndarray, pairs: int = 20, seed: int = 0) -> float:
    """Largest ``|<H d1, d2> - <d1, H d2>| / (|H d1||d2| + |d1||H d2|)`` over random pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        d1 = rng.standard_normal(x.shape)
        d2 = rng.standard_normal(x.shape)
        h1 = obj.hessian_apply(x, d1)
        h2 = obj.hessian_apply(x, d2)
        scale = obj.norm(h1) * obj.norm(d2) + obj.norm(d1) * obj.norm(h2)
        if scale > 0:
            worst = max(worst, abs(obj.inner(h1, d2) - obj.inner(d1, h2)) / scale)
    return worst
