"""Validated field containers used at module boundaries (problem data, export)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class ScalarField:
    """Nodal values on a grid; ``dirichlet=True`` asserts zero values on both axis-0 planes."""

    grid: Grid
    values: np.ndarray
    dirichlet: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise FieldError(f"field shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise FieldError("field has non-finite values")
        if self.dirichlet and (np.any(values[0] != 0.0) or np.any(values[-1] != 0.0)):
            raise FieldError("Dirichlet field must vanish on the axis-0 boundary planes")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid, fn, dirichlet: bool = False) -> "ScalarField":
        values = np.asarray(fn(*grid.mesh), dtype=float) * np.ones(grid.shape)
        if dirichlet:
            values[0] = 0.0
            values[-1] = 0.0
        return cls(grid, values, dirichlet)


@dataclass(frozen=True)
class VectorField:
    grid: Grid
    components: tuple

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=float) for c in self.components)
        if len(comps) not in (2, 3):
            raise FieldError("vector fields have 2 or 3 components")
        for c in comps:
            if c.shape != self.grid.shape:
                raise FieldError("all components must live on the same grid")
        object.__setattr__(self, "components", comps)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]
