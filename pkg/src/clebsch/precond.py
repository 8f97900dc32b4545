"""Fast solver for constant-coefficient second-order operators on the slab.

The operator acts on ``m`` Dirichlet fields (interior nodes only) as

    A = sum_ab  C_x[a, b] K0  +  W0 * Q_ab(k)

with ``K0 = D0^T W0 D0`` the axis-0 stiffness, ``W0`` the axis-0 quadrature
weights and ``Q_ab(k) = sum_ij C_p[a, b][i, j] k_i k_j`` the Fourier symbol
on the periodic axes.  It is diagonalised by the generalized eigenvectors of
``(K0, W0)`` along axis 0 and by the FFT along the periodic axes, leaving an
``m x m`` system per mode.  Couplings between axis 0 and the periodic axes
are not represented.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import eigh

from .grid import Grid


class SlabPreconditioner:
    def __init__(self, grid: Grid, coef_x, coef_p, shift: float = 0.0):
        """
        Parameters
        ----------
        coef_x : array (m, m)
            Coefficients of the axis-0 stiffness between fields.
        coef_p : array (m, m, dim-1, dim-1)
            Coefficients of ``k_i k_j`` on the periodic axes.
        shift : float
            Added multiple of the identity (mass) per field.
        """
        self.grid = grid
        coef_x = np.atleast_2d(np.asarray(coef_x, dtype=float))
        m = coef_x.shape[0]
        coef_p = np.asarray(coef_p, dtype=float).reshape(m, m, grid.dim - 1, grid.dim - 1)
        self.nfields = m
        inner = slice(1, grid.counts[0] - 1)
        w = grid.w0[inner]
        D = grid.d0[:, inner]
        K = D.T @ (grid.w0[:, None] * D)
        lam, V = eigh(K, np.diag(w))
        self._V = V
        self._w = w
        # symbol per periodic mode on the rfftn layout
        ks = [grid.wavenumbers(a) for a in range(1, grid.dim)]
        last = grid.counts[-1]
        kr = 2 * np.pi * np.fft.rfftfreq(last, d=grid.extents[-1] / last)
        if last % 2 == 0:
            kr[-1] = 0.0
        ks[-1] = kr
        kk = np.meshgrid(*ks, indexing="ij")
        modes_shape = kk[0].shape
        A = np.zeros((lam.size,) + modes_shape + (m, m))
        for a in range(m):
            for b in range(m):
                q = np.zeros(modes_shape)
                for i in range(grid.dim - 1):
                    for j in range(grid.dim - 1):
                        q = q + coef_p[a, b, i, j] * kk[i] * kk[j]
                sym = 0.5 * (coef_x[a, b] + coef_x[b, a])
                A[..., a, b] += sym * lam.reshape((-1,) + (1,) * len(modes_shape)) + q[None]
                if a == b:
                    A[..., a, b] += shift
        A = 0.5 * (A + np.swapaxes(A, -1, -2))
        self._Ainv = np.linalg.inv(A)
        self._axes = tuple(range(1, grid.dim))

    def __call__(self, r: np.ndarray) -> np.ndarray:
        """Apply ``A^{-1} W`` to a stacked representer ``r`` of shape ``(m, *interior_shape)`` or flat."""
        g = self.grid
        shape = (self.nfields,) + g.interior_shape
        r = np.reshape(r, shape)
        periodic = tuple(a + 1 for a in self._axes)
        # project axis 0 onto W-orthonormal eigenvectors: c = V^T W r
        c = np.einsum("ij,fi...->fj...", self._V, self._w.reshape((-1,) + (1,) * (g.dim - 1)) * r)
        ch = np.fft.rfftn(c, axes=periodic)
        ch = np.moveaxis(ch, 0, -1)
        zh = np.einsum("...ab,...b->...a", self._Ainv, ch)
        zh = np.moveaxis(zh, -1, 0)
        z = np.fft.irfftn(zh, s=g.counts[1:], axes=periodic)
        z = np.einsum("ij,fj...->fi...", self._V, z)
        return z.reshape(-1)
