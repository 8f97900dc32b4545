"""CSV and legacy-VTK writers for nodal fields (17 significant digits)."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .grid import Grid

_AXES = ("x", "y", "z")


def write_csv(path, grid: Grid, values: np.ndarray, name: str = "value") -> Path:
    """One row per node: coordinates, then the value; header names the columns."""
    path = Path(path)
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
    cols = [m.reshape(-1) for m in grid.mesh] + [values.reshape(-1)]
    header = ",".join(_AXES[: grid.dim] + (name,))
    np.savetxt(path, np.column_stack(cols), delimiter=",", header=header, comments="", fmt="%.17g")
    return path


def write_vtk(path, grid: Grid, fields: dict, title: str = "clebsch fields") -> Path:
    """Legacy VTK STRUCTURED_POINTS with scalar (array) and vector (3-tuple) point data.

    VTK orders points with x varying fastest, so arrays are written transposed.
    """
    if grid.dim != 3:
        raise ValueError("VTK export is for 3D grids")
    path = Path(path)
    nx, ny, nz = grid.shape
    hx, hy, hz = grid.spacing
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} {nz}",
        "ORIGIN 0 0 0",
        f"SPACING {hx:.17g} {hy:.17g} {hz:.17g}",
        f"POINT_DATA {nx * ny * nz}",
    ]
    for name, val in fields.items():
        if isinstance(val, (tuple, list)):
            comps = [np.asarray(c, dtype=float).transpose(2, 1, 0).reshape(-1) for c in val]
            lines.append(f"VECTORS {name} double")
            lines.extend(f"{a:.17g} {b:.17g} {c:.17g}" for a, b, c in zip(*comps))
        else:
            arr = np.asarray(val, dtype=float)
            if arr.shape != grid.shape:
                raise ValueError(f"field {name!r} has shape {arr.shape}, grid is {grid.shape}")
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(f"{v:.17g}" for v in arr.transpose(2, 1, 0).reshape(-1))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_vtk_scalars(path) -> dict:
    """Minimal reader for files written by :func:`write_vtk` (scalars only); returns arrays in ``(x, y, z)`` order."""
    lines = Path(path).read_text().splitlines()
    dims = None
    out = {}
    i = 0
    while i < len(lines):
        tok = lines[i].split()
        if tok and tok[0] == "DIMENSIONS":
            dims = tuple(int(t) for t in tok[1:])
        if tok and tok[0] == "SCALARS":
            n = int(np.prod(dims))
            vals = np.array([float(v) for v in lines[i + 2: i + 2 + n]])
            out[tok[1]] = vals.reshape(dims[::-1]).transpose(2, 1, 0)
            i += 2 + n
            continue
        i += 1
    return out
