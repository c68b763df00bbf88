"""P1 finite-element operators on a polar mesh.

Fields are plain arrays with one value per mesh vertex; vertices removed by
Dirichlet elimination carry the value 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateCell, NothingToEliminate
from .geometry import Marker, Mesh, edge_lengths


@dataclass(frozen=True, eq=False)
class SymmetricOperator:
    """Sparse symmetric matrix acting on the vertices listed in ``dof_map``.

    Row ``i`` of ``matrix`` belongs to mesh vertex ``dof_map[i]``.
    """

    matrix: sp.csr_matrix
    dof_map: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def entries(self) -> list[tuple[int, int, float]]:
        """(row, col, value) triplets in row-major order, explicit zeros dropped."""
        coo = self.matrix.tocoo()
        keep = coo.data != 0
        order = np.lexsort((coo.col[keep], coo.row[keep]))
        return list(
            zip(
                coo.row[keep][order].tolist(),
                coo.col[keep][order].tolist(),
                coo.data[keep][order].tolist(),
            )
        )

    def restrict(self, field: np.ndarray) -> np.ndarray:
        return np.asarray(field, dtype=float)[self.dof_map]

    def quadratic_form(self, field: np.ndarray) -> float:
        """u^T A u for a full per-vertex field."""
        u = self.restrict(field)
        return float(u @ (self.matrix @ u))

    def bilinear_form(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(self.restrict(f) @ (self.matrix @ self.restrict(g)))

    def write_text(self, path: str | Path) -> None:
        lines = [f"# dimension {self.dimension}; rows/cols are matrix indices, see dof_map"]
        lines.append("dof_map " + " ".join(str(v) for v in self.dof_map))
        lines.extend(f"{i} {j} {v!r}" for i, j, v in self.entries())
        Path(path).write_text("\n".join(lines) + "\n")


def _full(mesh: Mesh, rows, cols, vals) -> SymmetricOperator:
    n = mesh.n_vertices
    A = sp.coo_matrix((np.ravel(vals), (np.ravel(rows), np.ravel(cols))), shape=(n, n)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return SymmetricOperator(A, np.arange(n))


def _gradients(mesh: Mesh):
    p = mesh.vertices[mesh.triangles]
    area = mesh.signed_areas()
    if len(area) and area.min() <= 0:
        raise DegenerateCell(f"triangle {int(np.argmin(area))} has non-positive area")
    # grad of barycentric lambda_k is rot90(opposite edge) / (2 area)
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    grad = np.stack([-e[..., 1], e[..., 0]], axis=-1) / (2 * area[:, None, None])
    return grad, area


def element_stiffness(tri_vertices: np.ndarray) -> np.ndarray:
    """3x3 P1 stiffness of a single triangle (rows sum to zero)."""
    p = np.asarray(tri_vertices, dtype=float)
    mesh = Mesh(p, np.array([[0, 1, 2]]), np.empty((0, 2), int), np.empty(0, np.int8), np.zeros(3, np.int8))
    grad, area = _gradients(mesh)
    return area[0] * grad[0] @ grad[0].T


def assemble_stiffness(mesh: Mesh) -> SymmetricOperator:
    """Matrix of  int grad u . grad v  over the triangulated domain."""
    grad, area = _gradients(mesh)
    K = area[:, None, None] * np.einsum("tid,tjd->tij", grad, grad)
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1)
    cols = np.tile(t, (1, 3))
    return _full(mesh, rows, cols, K.reshape(len(t), 9))


def assemble_domain_mass(mesh: Mesh) -> SymmetricOperator:
    area = mesh.signed_areas()
    local = (np.ones((3, 3)) + np.eye(3)) / 12.0
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1)
    cols = np.tile(t, (1, 3))
    vals = area[:, None] * local.reshape(1, 9)
    return _full(mesh, rows, cols, vals)


def _edge_mass(mesh: Mesh, edges: np.ndarray) -> SymmetricOperator:
    ell = edge_lengths(mesh, edges) if len(edges) else np.empty(0)
    local = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    rows = np.repeat(edges, 2, axis=1)
    cols = np.tile(edges, (1, 2))
    vals = ell[:, None] * local.reshape(1, 4)
    return _full(mesh, rows, cols, vals)


def assemble_boundary_mass(mesh: Mesh, marker: Marker = Marker.OUTER) -> SymmetricOperator:
    """Exact L2 mass of piecewise-linear traces on the edges tagged ``marker``."""
    return _edge_mass(mesh, mesh.marked_edges(marker))


def assemble_full_boundary_mass(mesh: Mesh) -> SymmetricOperator:
    return _edge_mass(mesh, mesh.boundary_edges)


def apply_dirichlet(op: SymmetricOperator, mesh: Mesh) -> SymmetricOperator:
    """Drop rows and columns of the inner-boundary vertices."""
    inner = mesh.marked_vertices(Marker.INNER)
    if len(inner) == 0:
        raise NothingToEliminate("mesh has no inner boundary; use the pure Steklov path")
    keep_mask = np.ones(mesh.n_vertices, dtype=bool)
    keep_mask[inner] = False
    keep_local = keep_mask[op.dof_map]
    A = op.matrix[keep_local][:, keep_local].tocsr()
    A.sort_indices()
    return SymmetricOperator(A, op.dof_map[keep_local])


def boundary_inner_product(mesh: Mesh, f: np.ndarray, g: np.ndarray, marker: Marker = Marker.OUTER) -> float:
    return assemble_boundary_mass(mesh, marker).bilinear_form(f, g)


def h1_norm_sq(mesh: Mesh, f: np.ndarray) -> float:
    return assemble_stiffness(mesh).quadratic_form(f) + assemble_domain_mass(mesh).quadratic_form(f)


def h1_distance_to_constant(mesh: Mesh, f: np.ndarray, c: float, hole_area: float) -> float:
    """Squared H1(Omega_0) distance between the zero-extended field and ``c``.

    Dirichlet energy of f + ||f - c||^2 on the mesh + c^2 * hole_area.
    """
    f = np.asarray(f, dtype=float)
    energy = assemble_stiffness(mesh).quadratic_form(f)
    l2 = assemble_domain_mass(mesh).quadratic_form(f - c)
    return energy + l2 + c * c * hole_area
