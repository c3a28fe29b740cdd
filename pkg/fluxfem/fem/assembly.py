# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .functions import FeFunction, basis_gradients, element_groups, evaluate_field, quadrature_points

logger = logging.getLogger(__name__)

_LOCAL_MASS = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


def _assemble(mesh, local):
    """Sum local (n_triangles, 3, 3) matrices into a symmetric CSR matrix."""
    rows = np.repeat(mesh.triangles[:, :, None], 3, axis=2)
    cols = np.repeat(mesh.triangles[:, None, :], 3, axis=1)
    n = mesh.n_vertices
    matrix = sp.coo_matrix((local.ravel(), (rows.ravel(), cols.ravel())), shape=(n, n)).tocsr()
    # duplicate summation order is not guaranteed; average with the transpose
    return (0.5 * (matrix + matrix.T)).tocsr()


def assemble_stiffness(mesh):
    """Full vertex-indexed P1 stiffness matrix (no constraints eliminated).

    :raises DegenerateElementError: for a triangle of zero area
    """
    grads = basis_gradients(mesh)
    local = mesh.areas[:, None, None] * np.einsum("tid,tjd->tij", grads, grads)
    return _assemble(mesh, local)


def assemble_mass(mesh):
    """Full vertex-indexed P1 mass matrix."""
    return _assemble(mesh, mesh.areas[:, None, None] * _LOCAL_MASS[None, :, :])


def assemble_load(mesh, f, quad=None, corner_quad=None):
    """Load vector b_i = ∫ f φ_i, integrated element by element.

    Triangles at the singular corner use ``corner_quad``.

    :raises NonFiniteValueError: if ``f`` is not finite at a quadrature point
    """
    load = np.zeros(mesh.n_vertices)
    if f is None:
        return load
    areas = mesh.areas
    for indices, rule in element_groups(mesh, quad, corner_quad):
        points = quadrature_points(mesh, indices, rule)
        values = evaluate_field(f, points[..., 0], points[..., 1], indices)
        local = areas[indices, None] * np.einsum("mq,q,qk->mk", values, rule.weights, rule.points)
        load += np.bincount(mesh.triangles[indices].ravel(), local.ravel(), minlength=mesh.n_vertices)
    return load


def apply_stiffness(mesh, u, matrix=None):
    """A u over all vertices; ``u`` is an :class:`FeFunction` or a coefficient vector."""
    matrix = assemble_stiffness(mesh) if matrix is None else matrix
    coefficients = u.coefficients if isinstance(u, FeFunction) else np.asarray(u, dtype=float)
    return matrix @ coefficients


@dataclass(frozen=True, eq=False)
class SparseSystem:
    """Linear system on the free (interior) vertices after Dirichlet elimination.

    ``matrix`` and ``rhs`` are indexed by position in ``free``; the
    ``dirichlet_values`` by position in ``constrained``.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    dirichlet_values: np.ndarray
    free: np.ndarray
    constrained: np.ndarray

    @classmethod
    def eliminate(cls, mesh, matrix, load, dirichlet_values):
        free = mesh.interior_vertices
        constrained = mesh.boundary_vertices
        dirichlet_values = np.asarray(dirichlet_values, dtype=float)
        rhs = load[free] - matrix[free][:, constrained] @ dirichlet_values
        return cls(
            matrix=matrix[free][:, free].tocsr(),
            rhs=rhs,
            dirichlet_values=dirichlet_values,
            free=free,
            constrained=constrained,
        )

    @property
    def n_free(self):
        return len(self.free)

    def expand(self, free_values):
        """Full vertex vector from the free values and the Dirichlet data."""
        values = np.empty(len(self.free) + len(self.constrained))
        values[self.free] = free_values
        values[self.constrained] = self.dirichlet_values
        return values


def dump_matrix(matrix, path):
    """Write ``matrix`` as ``i j value`` coordinate triplets, 0-based."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8") as stream:
        for i, j, value in zip(coo.row[order], coo.col[order], coo.data[order]):
            stream.write(f"{i} {j} {float(value)!r}\n")
    logger.info("Matrix %s with %d entries written to %s", matrix.shape, coo.nnz, path)
