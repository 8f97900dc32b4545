"""Numerical checks of interpolation, product, coercivity and Poincare inequalities.

Fields are random trigonometric polynomials, resolved on the target grid.
Inequalities with explicit constants are asserted with slack; constants
whose value is only known to exist are estimated and reported.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .flux import ToyFlux
from .grid import Grid


@dataclass(frozen=True)
class RandomFieldSampler:
    """Random trigonometric polynomials on a grid.

    Coefficients are standard normal scaled by ``(1 + |mode|)^(-decay)``.
    Axis 0 uses ``sin(j pi x / L)`` when ``dirichlet`` is set, otherwise
    it is treated like the periodic axes.  Periodic modes stay strictly
    below the Nyquist index so every field is exactly resolved there.
    """

    grid: Grid
    seed: int = 0
    max_modes: tuple[int, ...] | None = None
    decay: float = 2.0
    dirichlet: bool = True

    def _modes(self):
        g = self.grid
        if self.max_modes is not None:
            mm = tuple(self.max_modes)
        else:
            mm = (max(1, g.counts[0] // 4),) + tuple(max(1, (n - 1) // 2 - 1) for n in g.counts[1:])
        for a in range(1, g.dim):
            if mm[a] >= g.counts[a] / 2:
                raise ValueError(f"mode {mm[a]} on axis {a} is not resolved by {g.counts[a]} points")
        return mm

    def _axis_bases(self):
        """Per-axis ``(labels, matrix)`` with one column per 1D mode."""
        g = self.grid
        mm = self._modes()
        out = []
        for a in range(g.dim):
            x, ext = g.axes[a], g.extents[a]
            if a == 0 and self.dirichlet:
                modes = [(j, np.sin(j * np.pi * x / ext)) for j in range(1, mm[0] + 1)]
            else:
                modes = _periodic_1d(x, ext, mm[a])
            out.append(([m for m, _ in modes], np.stack([b for _, b in modes], axis=1)))
        return out

    def basis(self):
        """List of ``(mode_tuple, field)`` spanning the sampled space (fixed order)."""
        bases = self._axis_bases()
        out = []
        for combo in itertools.product(*(range(len(lab)) for lab, _ in bases)):
            modes = tuple(bases[a][0][i] for a, i in enumerate(combo))
            f = bases[0][1][:, combo[0]]
            for a in range(1, len(bases)):
                f = np.multiply.outer(f, bases[a][1][:, combo[a]])
            out.append((modes, f))
        return out

    def sample(self, count: int, stream: int = 0) -> list[np.ndarray]:
        """``count`` fields; ``stream`` selects an independent sequence for the same seed."""
        rng = np.random.default_rng([self.seed, stream])
        bases = self._axis_bases()
        labels = np.meshgrid(*(np.abs(np.array(lab, dtype=float)) for lab, _ in bases), indexing="ij")
        scale = (1.0 + np.sqrt(sum(m * m for m in labels))) ** (-self.decay)
        out = []
        for _ in range(count):
            c = rng.standard_normal(scale.shape) * scale
            for a, (_, B) in enumerate(bases):
                # contract coefficient axis a with the 1D basis, keeping axis order
                c = np.moveaxis(np.tensordot(B, c, axes=([1], [a])), 0, a)
            out.append(c)
        return out


def _periodic_1d(x, period, kmax):
    """Signed mode labels: ``+k`` for cos, ``-k`` for sin, ``0`` for the constant."""
    out = [(0, np.ones_like(x))]
    for k in range(1, kmax + 1):
        out.append((k, np.cos(2 * np.pi * k * x / period)))
        out.append((-k, np.sin(2 * np.pi * k * x / period)))
    return out


# ---------------------------------------------------------------------------------------
# 1D interpolation along the periodic axis


def interp_1d_x2_check(fields, grid: Grid, sigma: int, s: int, slack: float = 1e-8) -> dict:
    """``||d2^sigma f||^2 <= ||f||^(2(s-sigma)/s) ||d2^s f||^(2 sigma/s)`` on each field.

    The zero mode in ``x2`` is removed first (it contributes to ``||f||`` only,
    which can only help).  Returns the largest relative violation
    ``lhs / rhs - 1`` (non-positive when the inequality holds).
    """
    if not 0 < sigma < s:
        raise ValueError("need 0 < sigma < s")
    worst = -math.inf
    ratios = []
    for f in fields:
        f = np.asarray(f, dtype=float)
        f = f - np.mean(f, axis=1, keepdims=True)
        lhs = grid.l2_norm(grid.diff(f, 1, sigma)) ** 2
        n0 = grid.l2_norm(f) ** 2
        ns = grid.l2_norm(grid.diff(f, 1, s)) ** 2
        rhs = n0 ** ((s - sigma) / s) * ns ** (sigma / s)
        if rhs == 0.0:
            r = 0.0 if lhs == 0.0 else math.inf
        else:
            r = lhs / rhs - 1.0
        ratios.append(r)
        worst = max(worst, r)
    return {
        "max_relative_violation": worst,
        "ok": bool(worst <= slack),
        "sigma": sigma,
        "s": s,
        "samples": len(ratios),
    }


# ---------------------------------------------------------------------------------------
# mixed-derivative interpolation constant


def _gram(grid, fields, alpha):
    ders = np.stack([grid.derivative(f, alpha).reshape(-1) for f in fields])
    G = (ders * grid.weights.reshape(-1)) @ ders.T
    return 0.5 * (G + G.T)


def mixed_interp_report(sampler: RandomFieldSampler, m1: int, m2: int, eps_list, samples: int = 200,
                        validation: int = 200) -> dict:
    """Estimate ``C_eps`` in ``||d1^m1 d2^m2 u||^2 <= eps ||d1^m u||^2 + C_eps ||d2^m u||^2``.

    Two estimates are reported per ``eps``.  ``sample_max`` is the largest
    ratio over the fitting samples.  ``span_sup`` is the exact supremum over
    the sampler's whole (finite-dimensional) span, the top generalized
    eigenvalue of ``(G_mix - eps G_1, G_2)``; being a bound for every field
    the sampler can produce, it is the constant validated on a fresh sample.
    """
    m = m1 + m2
    if not (m1 >= 0 and m2 >= 0 and m1 < m):
        raise ValueError("need m1 < m1 + m2")
    g = sampler.grid
    a_mix = (m1, m2) + (0,) * (g.dim - 2)
    a_1 = (m,) + (0,) * (g.dim - 1)
    a_2 = (0, m) + (0,) * (g.dim - 2)
    basis = [b for _, b in sampler.basis()]
    Gm, G1, G2 = (_gram(g, basis, a) for a in (a_mix, a_1, a_2))
    fit = sampler.sample(samples, stream=1)
    val = sampler.sample(validation, stream=2)

    def parts(f):
        return (
            g.l2_norm(g.derivative(f, a_mix)) ** 2,
            g.l2_norm(g.derivative(f, a_1)) ** 2,
            g.l2_norm(g.derivative(f, a_2)) ** 2,
        )

    fit_parts = [parts(f) for f in fit]
    val_parts = [parts(f) for f in val]
    # restrict the pencil to the range of G2 (modes constant in x2 have G2 = 0 and Gm = 0)
    lam2, V2 = np.linalg.eigh(G2)
    keep = lam2 > 1e-12 * max(lam2.max(), 1e-300)
    V = V2[:, keep]
    table = []
    for eps in eps_list:
        eps = float(eps)
        ratios = [max(0.0, (pm - eps * p1)) / p2 for pm, p1, p2 in fit_parts if p2 > 0]
        sample_max = max(ratios) if ratios else 0.0
        A = V.T @ (Gm - eps * G1) @ V
        B = V.T @ G2 @ V
        sup = float(max(0.0, eigh(0.5 * (A + A.T), 0.5 * (B + B.T), eigvals_only=True)[-1]))
        c_hat = sup * (1 + 1e-10)
        violation = max(
            ((pm - eps * p1 - c_hat * p2) / max(pm, 1e-300) for pm, p1, p2 in val_parts),
            default=-math.inf,
        )
        table.append(
            {
                "eps": eps,
                "sample_max": sample_max,
                "span_sup": sup,
                "c_hat": c_hat,
                "finite": bool(math.isfinite(c_hat)),
                "validation_max_violation": violation,
                "validated": bool(violation <= 1e-8),
            }
        )
    return {"m1": m1, "m2": m2, "samples": samples, "validation": validation, "seed": sampler.seed, "table": table}


def mixed_interp_ratio(grid: Grid, u: np.ndarray, m1: int, m2: int, eps: float) -> float:
    """Smallest ``C`` making the mixed inequality hold for the single field ``u`` (0 if the x2 part vanishes)."""
    m = m1 + m2
    a_mix = (m1, m2) + (0,) * (grid.dim - 2)
    a_1 = (m,) + (0,) * (grid.dim - 1)
    a_2 = (0, m) + (0,) * (grid.dim - 2)
    pm = grid.l2_norm(grid.derivative(u, a_mix)) ** 2
    p1 = grid.l2_norm(grid.derivative(u, a_1)) ** 2
    p2 = grid.l2_norm(grid.derivative(u, a_2)) ** 2
    excess = pm - eps * p1
    if excess <= 0:
        return 0.0
    return excess / p2 if p2 > 0 else math.inf


# ---------------------------------------------------------------------------------------
# product estimate


def product_ratio(grid: Grid, fields, alphas, p: int) -> float:
    """``||prod d^alpha_j u_j|| / sum_cyclic ||u_i||_{H^p} prod_{j != i} ||u_j||_inf``."""
    if len(fields) != len(alphas):
        raise ValueError("one multi-index per field")
    if sum(sum(a) for a in alphas) != p:
        raise ValueError("multi-index orders must add up to p")
    prod = np.ones(grid.shape)
    for u, a in zip(fields, alphas):
        prod = prod * grid.derivative(u, a)
    lhs = grid.l2_norm(prod)
    sup = [float(np.max(np.abs(u))) for u in fields]
    hp = [grid.sobolev_norm(u, p) for u in fields]
    k = len(fields)
    rhs = sum(hp[i] * math.prod(sup[j] for j in range(k) if j != i) for i in range(k))
    return lhs / rhs if rhs > 0 else 0.0


def product_estimate_report(sampler: RandomFieldSampler, multiindices, samples: int = 100) -> dict:
    """Empirical constant of the product estimate on two independent sample sets."""
    p = sum(sum(a) for a in multiindices)
    k = len(multiindices)
    out = {}
    for name, stream in (("first", 10), ("second", 20)):
        fields = sampler.sample(samples * k, stream=stream)
        c = 0.0
        for i in range(samples):
            c = max(c, product_ratio(sampler.grid, fields[i * k:(i + 1) * k], multiindices, p))
        out[name] = c
    lo, hi = sorted((out["first"], out["second"]))
    return {
        "p": p,
        "multiindices": [list(a) for a in multiindices],
        "c_first": out["first"],
        "c_second": out["second"],
        "finite": bool(math.isfinite(hi)),
        "stable": bool(hi <= 2 * lo) if lo > 0 else hi == 0,
        "samples": samples,
        "seed": sampler.seed,
    }


# ---------------------------------------------------------------------------------------
# pointwise coercivity and Poincare


def discrete_poincare_constant(grid: Grid) -> float:
    """Largest ``||F|| / ||d1 F||`` over grid functions vanishing on the Dirichlet planes.

    The quantity is separable, so it reduces to the axis-0 generalized
    eigenproblem of the stiffness against the mass.
    """
    inner = slice(1, grid.counts[0] - 1)
    D = grid.d0[:, inner]
    K = D.T @ (grid.w0[:, None] * D)
    lam = eigh(K, np.diag(grid.w0[inner]), eigvals_only=True)
    return float(1.0 / math.sqrt(lam[0]))


def pointwise_coercivity_check(flux: ToyFlux, grid: Grid, samples: int = 1000, seed: int = 0) -> dict:
    """``min q^T J_a(x, z) q - rho q1^2`` over sampled ``x``, ``|z| <= rho`` and unit ``q``; plus Poincare."""
    rng = np.random.default_rng(seed)
    i0 = rng.integers(0, grid.counts[0], samples)
    i1 = rng.integers(0, grid.counts[1], samples)
    x1, x2 = grid.axes[0][i0], grid.axes[1][i1]
    rad = flux.rho * np.sqrt(rng.uniform(0, 1, samples))
    th = rng.uniform(0, 2 * np.pi, samples)
    z1, z2 = rad * np.cos(th), rad * np.sin(th)
    ph = rng.uniform(0, 2 * np.pi, samples)
    q1, q2 = np.cos(ph), np.sin(ph)
    j11, j12, j21, j22 = flux.jacobian(x1, x2, z1, z2)
    margin = j11 * q1 * q1 + (j12 + j21) * q1 * q2 + j22 * q2 * q2 - flux.rho * q1 * q1
    L = grid.extents[0]
    c = discrete_poincare_constant(grid)
    return {
        "min_margin": float(np.min(margin)),
        "poincare_constant": c,
        "poincare_continuum": L / math.pi,
        "poincare_ok": bool(c <= L * (1 / math.pi + 0.01)),
        "samples": samples,
        "seed": seed,
    }
