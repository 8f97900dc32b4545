"""Tensor grids on the slab (0, L) x periodic cell.

Axis 0 is bounded and carries homogeneous Dirichlet data; it is sampled on a
closed uniform grid (both boundary nodes included) and differentiated with a
diagonal-norm summation-by-parts operator.  The remaining axes are periodic,
sampled over one period with the endpoint excluded, and differentiated
pseudo-spectrally.

Fields are plain ``numpy`` arrays of shape ``grid.shape``; vector fields are
tuples (or stacked arrays) of such arrays.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .sbp import min_points, sbp_operator


class GridSizeError(ValueError):
    """Raised when a grid cannot support the requested stencil or norm."""


@dataclass(frozen=True)
class Grid:
    """Slab grid.

    Parameters
    ----------
    counts : tuple of int
        Nodes per axis.  ``counts[0]`` includes both Dirichlet boundary nodes;
        periodic axes store one period without the endpoint.
    extents : tuple of float
        ``(L, P_y[, P_z])``.
    derivative_order : int
        Accuracy order of the axis-0 operator at the boundary closure (the
        interior stencil is of order ``2 * derivative_order``).
    """

    counts: tuple[int, ...]
    extents: tuple[float, ...] | None = None
    derivative_order: int = 4

    def __post_init__(self):
        counts = tuple(int(n) for n in self.counts)
        extents = tuple(float(e) for e in (self.extents or (1.0,) * len(counts)))
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "extents", extents)
        if len(counts) not in (2, 3) or len(extents) != len(counts):
            raise GridSizeError(f"grid must be 2D or 3D with one extent per axis, got {counts}, {extents}")
        if min(extents) <= 0:
            raise GridSizeError(f"extents must be positive, got {extents}")
        if counts[0] < min_points(self.derivative_order):
            raise GridSizeError(
                f"axis 0 needs at least {min_points(self.derivative_order)} nodes for "
                f"derivative order {self.derivative_order}, got {counts[0]}"
            )
        if min(counts[1:]) < 2:
            raise GridSizeError("periodic axes need at least 2 nodes")

    @classmethod
    def slab(cls, n, extents=None, dim=None, derivative_order=4):
        """Convenience constructor: ``n`` is an int (same count on every axis) or a tuple."""
        if np.isscalar(n):
            n = (int(n),) * (dim or len(extents or (1.0, 1.0)))
        return cls(tuple(n), tuple(extents) if extents else None, derivative_order)

    # -- geometry ---------------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def spacing(self) -> tuple[float, ...]:
        n = self.counts
        return (self.extents[0] / (n[0] - 1),) + tuple(p / m for p, m in zip(self.extents[1:], n[1:]))

    @property
    def volume(self) -> float:
        return float(np.prod(self.extents))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        x0 = np.linspace(0.0, self.extents[0], self.counts[0])
        rest = tuple(np.arange(m) * (p / m) for p, m in zip(self.extents[1:], self.counts[1:]))
        return (x0,) + rest

    @cached_property
    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    # -- axis-0 operator ----------------------------------------------------------

    @cached_property
    def _sbp(self):
        return sbp_operator(self.counts[0], self.derivative_order, self.extents[0])

    @property
    def d0(self) -> np.ndarray:
        """Axis-0 derivative matrix."""
        return self._sbp[0]

    @property
    def w0(self) -> np.ndarray:
        """Axis-0 quadrature weights (the SBP norm)."""
        return self._sbp[1]

    @cached_property
    def d0_adjoint(self) -> np.ndarray:
        """``W^{-1} D^T W``: the axis-0 derivative's adjoint under the quadrature inner product."""
        w = self.w0
        return (self.d0.T * w[None, :]) / w[:, None]

    @cached_property
    def weights(self) -> np.ndarray:
        """Nodal quadrature weights, shape ``self.shape``."""
        w = self.w0 * np.prod(self.spacing[1:])
        return w.reshape((-1,) + (1,) * (self.dim - 1)) * np.ones(self.shape)

    # -- periodic axes ----------------------------------------------------------------

    def wavenumbers(self, axis: int) -> np.ndarray:
        """Angular wavenumbers of a full FFT along a periodic axis (Nyquist set to 0)."""
        n = self.counts[axis]
        k = 2 * np.pi * np.fft.fftfreq(n, d=self.extents[axis] / n)
        if n % 2 == 0:
            k[n // 2] = 0.0
        return k

    def _rwavenumbers(self, axis: int) -> np.ndarray:
        n = self.counts[axis]
        k = 2 * np.pi * np.fft.rfftfreq(n, d=self.extents[axis] / n)
        if n % 2 == 0:
            k[-1] = 0.0
        return k

    # -- derivatives ----------------------------------------------------------------

    def diff(self, u: np.ndarray, axis: int, order: int = 1) -> np.ndarray:
        """``order``-th partial derivative of ``u`` along ``axis``.

        Axis 0 applies the SBP operator ``order`` times; periodic axes use
        Fourier differentiation with the Nyquist mode removed, so repeated
        first derivatives and a single call agree exactly.
        """
        if order < 1:
            raise ValueError("order must be >= 1")
        if not 0 <= axis < self.dim:
            raise ValueError(f"axis {axis} out of range for a {self.dim}D grid")
        u = np.asarray(u, dtype=float)
        if axis == 0:
            flat = u.reshape(self.counts[0], -1)
            for _ in range(order):
                flat = self.d0 @ flat
            return flat.reshape(u.shape)
        k = self._rwavenumbers(axis)
        shape = [1] * u.ndim
        shape[axis] = -1
        mult = ((1j * k) ** order).reshape(shape)
        return np.fft.irfft(np.fft.rfft(u, axis=axis) * mult, n=self.counts[axis], axis=axis)

    def gradient(self, u: np.ndarray) -> tuple[np.ndarray, ...]:
        return tuple(self.diff(u, a) for a in range(self.dim))

    def divergence(self, q) -> np.ndarray:
        """Strong divergence built from :meth:`diff`."""
        if len(q) != self.dim:
            raise ValueError(f"expected {self.dim} components, got {len(q)}")
        return sum(self.diff(qa, a) for a, qa in enumerate(q))

    def divergence_adjoint(self, q) -> np.ndarray:
        """Minus the quadrature adjoint of :meth:`gradient`.

        ``integrate(divergence_adjoint(q) * v) == -integrate(sum(q_a * d_a v))``
        for every grid function ``v``.  On nodes off the Dirichlet planes this
        coincides with :meth:`divergence`; on the planes it carries the
        boundary term of the summation-by-parts identity.
        """
        if len(q) != self.dim:
            raise ValueError(f"expected {self.dim} components, got {len(q)}")
        q0 = np.asarray(q[0], dtype=float)
        out = -(self.d0_adjoint @ q0.reshape(self.counts[0], -1)).reshape(q0.shape)
        for a in range(1, self.dim):
            out = out + self.diff(q[a], a)
        return out

    # -- quadrature and norms ----------------------------------------------------------

    def integrate(self, u: np.ndarray) -> float:
        return float(np.sum(self.weights * u))

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.sum(self.weights * u * v))

    def l2_norm(self, u: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(u, u), 0.0)))

    def derivative(self, u: np.ndarray, alpha) -> np.ndarray:
        """Mixed partial ``d^alpha u`` for a multi-index ``alpha``."""
        out = np.asarray(u, dtype=float)
        for axis, m in enumerate(alpha):
            if m:
                out = self.diff(out, axis, m)
        return out

    def sobolev_seminorms(self, u: np.ndarray, s: int) -> dict[tuple[int, ...], float]:
        """``{alpha: ||d^alpha u||_L2}`` for every multi-index with ``|alpha| <= s``."""
        if s < 0:
            raise ValueError("s must be non-negative")
        out = {}
        for alpha in multi_indices(self.dim, s):
            out[alpha] = self.l2_norm(self.derivative(u, alpha))
        return out

    def sobolev_norm(self, u: np.ndarray, s: int) -> float:
        """Discrete ``H^s`` norm: root of the sum of squared seminorms, ``|alpha| <= s``."""
        return float(np.sqrt(sum(v * v for v in self.sobolev_seminorms(u, s).values())))

    # -- masks -----------------------------------------------------------------------

    @cached_property
    def interior(self) -> tuple[slice, ...]:
        """Index selecting nodes off the two Dirichlet planes."""
        return (slice(1, self.counts[0] - 1),) + (slice(None),) * (self.dim - 1)

    @property
    def interior_shape(self) -> tuple[int, ...]:
        return (self.counts[0] - 2,) + self.counts[1:]

    def embed(self, interior_values: np.ndarray) -> np.ndarray:
        """Full-grid field with zero Dirichlet planes from interior values."""
        u = np.zeros(self.shape)
        u[self.interior] = np.reshape(interior_values, self.interior_shape)
        return u


def multi_indices(dim: int, s: int):
    """All multi-indices of length ``dim`` with total order ``<= s`` (graded order)."""
    for total in range(s + 1):
        for alpha in itertools.product(range(total + 1), repeat=dim):
            if sum(alpha) == total:
                yield alpha


def cross(a, b) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise cross product of two 3-component vector fields."""
    if len(a) != 3 or len(b) != 3:
        raise ValueError("cross product needs 3-component fields")
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def dot(a, b) -> np.ndarray:
    if len(a) != len(b):
        raise ValueError("dimension mismatch")
    return sum(x * y for x, y in zip(a, b))
