"""Diagonal-norm summation-by-parts first-derivative operators on a closed
uniform grid.

An operator of boundary order ``p`` uses the central stencil of order ``2p``
in the interior and ``2p`` boundary rows whose closure is exact on polynomials
of degree ``<= p``.  With ``W`` the diagonal norm (quadrature weights) and
``B = diag(-1, 0, ..., 0, 1)`` the pair satisfies

    W D + D^T W = B

exactly (up to the final rounding of rational coefficients), i.e. discrete
integration by parts holds with no remainder.  Coefficients are solved in
exact rational arithmetic; the free parameters of the closure are fixed by
taking the minimum-norm solution.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

SUPPORTED_ORDERS = (1, 2, 3, 4)


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Minimum-norm solution of a consistent rational linear system."""
    m = len(rows)
    n = len(rows[0])
    # row-reduce [A | b] to drop dependent equations
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivot_rows = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][col]
        aug[r] = [v * inv for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivot_rows.append(r)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][n] != 0:
            raise ValueError("inconsistent SBP accuracy conditions")
    A = [row[:n] for row in aug[:r]]
    b = [row[n] for row in aug[:r]]
    # x = A^T y with (A A^T) y = b
    G = [[sum(a * c for a, c in zip(A[i], A[j])) for j in range(r)] for i in range(r)]
    y = _gauss(G, b)
    return [sum(A[i][k] * y[i] for i in range(r)) for k in range(n)]


def _gauss(M: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(M)
    aug = [list(M[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * c for a, c in zip(aug[i], aug[col])]
    return [aug[i][n] for i in range(n)]


def central_weights(p: int) -> list[Fraction]:
    """Weights c_1..c_p of the order-2p central first derivative (unit spacing)."""
    rows = [[Fraction(2 * k ** (2 * m + 1)) for k in range(1, p + 1)] for m in range(p)]
    rhs = [Fraction(int(m == 0)) for m in range(p)]
    return _gauss(rows, rhs)


@lru_cache(maxsize=None)
def closure(p: int) -> tuple[tuple[Fraction, ...], dict[tuple[int, int], Fraction], tuple[Fraction, ...]]:
    """Boundary norm weights, boundary block of Q (i < j entries) and central weights.

    Unit grid spacing; ``Q = W D - B/2`` is antisymmetric.
    """
    if p not in SUPPORTED_ORDERS:
        raise ValueError(f"derivative order must be one of {SUPPORTED_ORDERS}, got {p}")
    c = central_weights(p)
    r = 1 if p == 1 else 2 * p
    pairs = [(i, j) for i in range(r) for j in range(i + 1, r)]
    nunk = r + len(pairs)
    rows, rhs = [], []
    for k in range(p + 1):
        for i in range(r):
            a = [Fraction(0)] * nunk
            const = Fraction(0)
            if i == 0:
                const -= Fraction(1, 2) * (0 ** k)
            for idx, (s, t) in enumerate(pairs):
                if s == i:
                    a[r + idx] += Fraction(t) ** k
                if t == i:
                    a[r + idx] -= Fraction(s) ** k
            for j in range(r, r + p):
                d = j - i
                if 1 <= d <= p:
                    const += c[d - 1] * Fraction(j) ** k
            if k > 0:
                a[i] -= k * Fraction(i) ** (k - 1)
            rows.append(a)
            rhs.append(-const)
    sol = _solve_exact(rows, rhs)
    weights = tuple(sol[:r])
    qblock = {pair: sol[r + idx] for idx, pair in enumerate(pairs)}
    return weights, qblock, tuple(c)


def min_points(p: int) -> int:
    """Smallest grid (node count) on which the order-p operator is defined."""
    return 3 if p == 1 else 4 * p


def sbp_operator(n: int, p: int, length: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Dense derivative matrix ``D`` and norm weights ``w`` on ``n`` nodes over [0, length]."""
    if n < min_points(p):
        raise ValueError(f"order-{p} operator needs at least {min_points(p)} nodes, got {n}")
    weights, qblock, c = closure(p)
    r = len(weights)
    Q = np.zeros((n, n))
    for i in range(n):
        for d in range(1, p + 1):
            if i + d < n:
                Q[i, i + d] = float(c[d - 1])
            if i - d >= 0:
                Q[i, i - d] = -float(c[d - 1])
    Q[:r, :r] = 0.0
    for (i, j), v in qblock.items():
        Q[i, j] = float(v)
        Q[j, i] = -float(v)
    # right closure is the antisymmetric mirror of the left one
    Q[n - r:, n - r:] = -Q[:r, :r][::-1, ::-1]
    w = np.ones(n)
    w[:r] = [float(v) for v in weights]
    w[n - r:] = w[:r][::-1]
    h = length / (n - 1)
    B = np.zeros((n, n))
    B[0, 0], B[-1, -1] = -1.0, 1.0
    D = (Q + 0.5 * B) / (w[:, None] * h)
    return D, w * h
