"""P1 finite element operators for the scalar wave equation with Dirichlet BCs.

Operators are returned as ``scipy.sparse.csr_matrix``. By default they are
restricted to interior DOFs (Dirichlet rows/columns eliminated).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh

_REF_MASS = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


@dataclass(frozen=True)
class CoefficientField:
    """Symmetric positive definite coefficient ``A(x)``.

    ``evaluate`` maps an ``(n, 2)`` array of points to an ``(n, 2, 2)`` array.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.broadcast_to(self.evaluate(points), (points.shape[0], 2, 2))

    @classmethod
    def identity(cls) -> "CoefficientField":
        return cls(lambda pts: np.broadcast_to(np.eye(2), (pts.shape[0], 2, 2)), label="identity")

    @classmethod
    def piecewise_constant(cls, blocks: Sequence[tuple], default=1.0) -> "CoefficientField":
        """Axis-aligned blocks ``(xmin, xmax, ymin, ymax, value)``.

        ``value`` is a positive scalar (isotropic) or a 2x2 SPD matrix. Later
        blocks override earlier ones where they overlap.
        """
        def as_matrix(v):
            v = np.asarray(v, dtype=float)
            return v * np.eye(2) if v.ndim == 0 else v.reshape(2, 2)

        base = as_matrix(default)
        parsed = [(b[0], b[1], b[2], b[3], as_matrix(b[4])) for b in blocks]

        def evaluate(pts):
            out = np.broadcast_to(base, (pts.shape[0], 2, 2)).copy()
            for x0, x1, y0, y1, val in parsed:
                inside = (pts[:, 0] >= x0) & (pts[:, 0] <= x1) & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
                out[inside] = val
            return out

        return cls(evaluate, label="piecewise-constant")


@dataclass(frozen=True)
class SpatialSource:
    """Gaussian spatial source and its nodal interpolant on interior DOFs."""

    center: tuple[float, float]
    width: float
    nodal: np.ndarray


def gaussian_density(points, center, width):
    """``exp(-|x - x0|^2 / (2 width^2)) / (sqrt(2 pi) width)``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r2 = np.sum((points - np.asarray(center, dtype=float)) ** 2, axis=1)
    return np.exp(-r2 / (2.0 * width**2)) / (np.sqrt(2.0 * np.pi) * width)


def gaussian_source(mesh: Mesh, center=(0.25, -0.15), width: float = 0.05) -> SpatialSource:
    if not width > 0:
        raise ValueError(f"source width must be positive, got {width}")
    nodal = gaussian_density(mesh.vertices[mesh.interior_vertices], center, width)
    return SpatialSource(center=tuple(map(float, center)), width=float(width), nodal=nodal)


def element_geometry(mesh: Mesh):
    """Per-triangle areas and barycentric gradients, shape ``(nt, 3, 2)``."""
    p = mesh.vertices[mesh.triangles]
    J = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)  # columns are edge vectors
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    if np.any(det <= 0):
        raise ValueError("mesh has degenerate or clockwise triangles")
    Jinv = np.empty_like(J)
    Jinv[:, 0, 0] = J[:, 1, 1] / det
    Jinv[:, 0, 1] = -J[:, 0, 1] / det
    Jinv[:, 1, 0] = -J[:, 1, 0] / det
    Jinv[:, 1, 1] = J[:, 0, 0] / det
    grads = np.empty((mesh.n_triangles, 3, 2))
    grads[:, 1:] = Jinv  # rows of J^{-1} are grad(lambda_1), grad(lambda_2)
    grads[:, 0] = -Jinv[:, 0] - Jinv[:, 1]
    return 0.5 * det, grads


def element_stiffness(areas, grads, coeffs):
    return areas[:, None, None] * np.einsum("eid,edf,ejf->eij", grads, coeffs, grads)


def element_mass(areas):
    return areas[:, None, None] * _REF_MASS


def _scatter(mesh: Mesh, local: np.ndarray, interior_only: bool) -> sp.csr_matrix:
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    nv = mesh.n_vertices
    A = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()
    A.sum_duplicates()
    if interior_only:
        iv = mesh.interior_vertices
        A = A[iv][:, iv].tocsr()
    return A


def assemble_stiffness(mesh: Mesh, coeff: CoefficientField | None = None,
                       interior_only: bool = True) -> sp.csr_matrix:
    """Stiffness matrix of ``int (A grad u) . grad v`` with one-point quadrature for ``A``."""
    coeff = coeff or CoefficientField.identity()
    areas, grads = element_geometry(mesh)
    centroids = mesh.vertices[mesh.triangles].mean(axis=1)
    A = np.asarray(coeff(centroids), dtype=float)
    if not np.allclose(A, np.swapaxes(A, 1, 2), rtol=0, atol=1e-14 * max(1.0, np.abs(A).max())):
        raise ValueError("coefficient field is not symmetric")
    if np.min(np.linalg.eigvalsh(A)) <= 0:
        raise ValueError("coefficient field is not positive definite at every centroid")
    return _scatter(mesh, element_stiffness(areas, grads, A), interior_only)


def assemble_mass(mesh: Mesh, interior_only: bool = True) -> sp.csr_matrix:
    """Consistent P1 mass matrix (exact integration)."""
    areas, _ = element_geometry(mesh)
    return _scatter(mesh, element_mass(areas), interior_only)


def assemble_gram_V(K, M, kind: str = "stiffness") -> sp.csr_matrix:
    """Gram matrix of the energy space inner product.

    ``kind="stiffness"`` returns ``K`` itself (H^1_0 seminorm); ``kind="h1"``
    returns ``K + M`` (full H^1 norm).
    """
    if K.shape != M.shape:
        raise ValueError(f"dimension mismatch: {K.shape} vs {M.shape}")
    if kind == "stiffness":
        return sp.csr_matrix(K)
    if kind == "h1":
        return sp.csr_matrix(K + M)
    raise ValueError(f"unknown Gram matrix kind {kind!r}")


def build_source_vector(mesh: Mesh, source: SpatialSource, M) -> np.ndarray:
    """Load vector ``b = M p_h`` for unit temporal amplitude."""
    if source.nodal.shape != (mesh.n_interior,):
        raise ValueError("source interpolant does not match the mesh interior")
    return M @ source.nodal
