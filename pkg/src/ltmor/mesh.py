"""Structured triangulation of the square (-1/2, 1/2)^2 with Dirichlet DOF bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class Mesh:
    """P1 triangle mesh.

    Attributes
    ----------
    vertices : (nv, 2) array
    triangles : (nt, 3) int array, counterclockwise
    boundary_mask : (nv,) bool array
    interior_index : (nv,) int array, -1 on boundary vertices
    h : float
        Maximum edge length.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_mask: np.ndarray
    interior_index: np.ndarray
    h: float
    interior_vertices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "interior_vertices", np.flatnonzero(~self.boundary_mask))
        for arr in (self.vertices, self.triangles, self.boundary_mask,
                    self.interior_index, self.interior_vertices):
            arr.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_interior(self) -> int:
        return self.interior_vertices.size

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique undirected edges and the number of triangles sharing each."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0, return_counts=True)

    def extend_to_vertices(self, interior_values: np.ndarray) -> np.ndarray:
        """Scatter interior DOF values to all vertices (zero on the boundary)."""
        interior_values = np.asarray(interior_values)
        out = np.zeros(self.n_vertices, dtype=interior_values.dtype)
        out[self.interior_vertices] = interior_values
        return out


def build_unit_square_mesh(n: int) -> Mesh:
    """Uniform-diagonal triangulation with ``n`` subdivisions per side.

    Each grid cell is split along its lower-left to upper-right diagonal,
    giving ``(n+1)**2`` vertices, ``2*n**2`` triangles and ``(n-1)**2``
    interior degrees of freedom.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"need at least 2 subdivisions per side, got {n!r}")
    n = int(n)
    x = np.linspace(-0.5, 0.5, n + 1)
    X, Y = np.meshgrid(x, x, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    idx = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
    v00 = idx[:-1, :-1].ravel()
    v10 = idx[:-1, 1:].ravel()
    v01 = idx[1:, :-1].ravel()
    v11 = idx[1:, 1:].ravel()
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    boundary = (np.abs(np.abs(vertices[:, 0]) - 0.5) <= BOUNDARY_TOL) | (
        np.abs(np.abs(vertices[:, 1]) - 0.5) <= BOUNDARY_TOL
    )
    interior_index = np.full(vertices.shape[0], -1, dtype=np.int64)
    interior_index[~boundary] = np.arange(np.count_nonzero(~boundary))
    return Mesh(vertices, triangles, boundary, interior_index, h=float(np.sqrt(2.0) / n))


def write_field_file(path, mesh: Mesh, values, name: str = "u") -> None:
    """Write mesh plus a nodal field as a plain-text field file.

    ``values`` may be given on all vertices or on interior DOFs only (then
    boundary vertices get zero). Layout, one record per line::

        # ltmor field <name>
        vertices <nv>
        x y
        triangles <nt>
        i j k
        values <nv>
        v
    """
    values = np.asarray(values, dtype=float)
    if values.shape == (mesh.n_interior,):
        values = mesh.extend_to_vertices(values)
    if values.shape != (mesh.n_vertices,):
        raise ValueError(f"field has shape {values.shape}, mesh has {mesh.n_vertices} vertices")
    lines = [f"# ltmor field {name}", f"vertices {mesh.n_vertices}"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    lines.append(f"triangles {mesh.n_triangles}")
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles]
    lines.append(f"values {mesh.n_vertices}")
    lines += [f"{v:.17g}" for v in values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_field_file(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of :func:`write_field_file`: returns (vertices, triangles, values)."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    pos = 0

    def block(tag, dtype, width):
        nonlocal pos
        key, count = lines[pos].split()
        if key != tag:
            raise ValueError(f"expected '{tag}' section, found '{key}'")
        count = int(count)
        rows = lines[pos + 1 : pos + 1 + count]
        pos += 1 + count
        arr = np.array([r.split() for r in rows], dtype=dtype)
        return arr.reshape(count, width) if width > 1 else arr.reshape(count)

    vertices = block("vertices", float, 2)
    triangles = block("triangles", np.int64, 3)
    values = block("values", float, 1)
    return vertices, triangles, values
