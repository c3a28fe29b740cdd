# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
from dataclasses import dataclass

import numpy as np

from ..geometry.mesh import DegenerateElementError
from .quadrature import corner_rule, standard_rule


class NonFiniteValueError(ValueError):
    def __init__(self, message, element=None, edge=None):
        super().__init__(message)
        self.element = element
        self.edge = edge


def _readonly(values):
    values = np.array(values, dtype=float)
    values.setflags(write=False)
    return values


def basis_gradients(mesh):
    """Gradients of the three hat functions on every triangle, shape (n_triangles, 3, 2).

    :raises DegenerateElementError: for a triangle of zero area
    """
    p = mesh.vertices[mesh.triangles]
    area2 = 2.0 * mesh.signed_areas
    bad = np.flatnonzero(np.abs(area2) <= np.finfo(float).tiny)
    if bad.size:
        raise DegenerateElementError(f"Triangle {bad[0]} has zero area", element=int(bad[0]))
    x, y = p[..., 0], p[..., 1]
    # ∇φ_k = (y_{k+1} - y_{k+2}, x_{k+2} - x_{k+1}) / (2|T|)
    gx = np.roll(y, -1, axis=1) - np.roll(y, -2, axis=1)
    gy = np.roll(x, -2, axis=1) - np.roll(x, -1, axis=1)
    return np.stack([gx, gy], axis=2) / area2[:, None, None]


def element_groups(mesh, quad=None, corner_quad=None):
    """Split the triangles into ``(indices, rule)`` groups.

    Triangles touching the singular corner get ``corner_quad`` rotated so
    that its concentrated vertex sits on the corner; all others use ``quad``.
    """
    quad = standard_rule() if quad is None else quad
    corner_quad = corner_rule() if corner_quad is None else corner_quad
    at_corner = mesh.corner_triangles
    groups = [(np.flatnonzero(~at_corner), quad)]
    if at_corner.any():
        local = np.argmax(mesh.triangles == mesh.singular_corner, axis=1)
        for k in range(3):
            indices = np.flatnonzero(at_corner & (local == k))
            if indices.size:
                groups.append((indices, corner_quad.rotated(k)))
    return [(indices, rule) for indices, rule in groups if indices.size]


def quadrature_points(mesh, indices, rule):
    """Physical quadrature points of the triangles ``indices``, shape (m, n, 2)."""
    p = mesh.vertices[mesh.triangles[indices]]
    return np.einsum("qk,mkd->mqd", rule.points, p)


def evaluate_field(f, x, y, indices=None, edges=False):
    """Evaluate a scalar field and reject NaN or infinite values.

    ``indices`` maps the first axis of ``x`` back to element (or, with
    ``edges``, boundary edge) ids for the error message.
    """
    values = np.asarray(f(x, y), dtype=float)
    values = np.broadcast_to(values, np.shape(x))
    finite = np.isfinite(values)
    if not finite.all():
        row = np.argwhere(~finite)[0][0]
        where = int(row if indices is None else indices[row])
        kind = "edge" if edges else "element"
        raise NonFiniteValueError(
            f"Field is not finite at a quadrature point of {kind} {where}",
            **{kind: where},
        )
    return values


@dataclass(frozen=True, eq=False)
class FeFunction:
    """Piecewise linear function given by its values at the mesh vertices."""

    mesh: object
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = _readonly(self.coefficients)
        if coefficients.shape != (self.mesh.n_vertices,):
            raise ValueError(
                f"Expected {self.mesh.n_vertices} coefficients, got shape {coefficients.shape}"
            )
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros(mesh.n_vertices))

    @classmethod
    def interpolate(cls, mesh, f):
        x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
        return cls(mesh, evaluate_field(f, x, y))

    def trace(self):
        return BoundaryFunction(self.mesh, self.coefficients[self.mesh.boundary_vertices])

    def gradients(self):
        """Constant gradient on every triangle, shape (n_triangles, 2)."""
        return np.einsum("tkd,tk->td", basis_gradients(self.mesh), self.coefficients[self.mesh.triangles])

    def evaluate_on_elements(self, bary, indices=None):
        """Values at barycentric points ``bary`` (shape (n, 3)) on each triangle."""
        triangles = self.mesh.triangles if indices is None else self.mesh.triangles[indices]
        return self.coefficients[triangles] @ np.asarray(bary).T


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """Continuous piecewise linear function on Γ, one value per boundary vertex.

    Coefficients follow ``mesh.boundary_vertices`` (ascending vertex index).
    """

    mesh: object
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = _readonly(self.coefficients)
        expected = len(self.mesh.boundary_vertices)
        if coefficients.shape != (expected,):
            raise ValueError(f"Expected {expected} boundary coefficients, got shape {coefficients.shape}")
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros(len(mesh.boundary_vertices)))

    @classmethod
    def interpolate(cls, mesh, g):
        nodes = mesh.vertices[mesh.boundary_vertices]
        return cls(mesh, evaluate_field(g, nodes[:, 0], nodes[:, 1]))

    def extend_by_zero(self):
        """FE function equal to this one on Γ and zero at all interior vertices."""
        values = np.zeros(self.mesh.n_vertices)
        values[self.mesh.boundary_vertices] = self.coefficients
        return FeFunction(self.mesh, values)

    def edge_values(self, s):
        """Values at the parameters ``s`` in [0, 1] along every boundary edge."""
        dof = self.mesh.boundary_dof_map[self.mesh.boundary_edges]
        start = self.coefficients[dof[:, 0]][:, None]
        end = self.coefficients[dof[:, 1]][:, None]
        s = np.asarray(s)[None, :]
        return (1.0 - s) * start + s * end


@dataclass(frozen=True, eq=False)
class EdgeFlux:
    """One constant value per boundary edge, in ``mesh.boundary_edges`` order."""

    mesh: object
    values: np.ndarray

    def __post_init__(self):
        values = _readonly(self.values)
        if values.shape != (len(self.mesh.boundary_edges),):
            raise ValueError(
                f"Expected {len(self.mesh.boundary_edges)} edge values, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    def edge_values(self, s):
        return np.repeat(self.values[:, None], np.size(s), axis=1)


def l2_error(mesh, u_h, exact, quad=None, corner_quad=None):
    """‖u_h - exact‖ in L²(Ω), with the corner-aware element rules."""
    total = 0.0
    areas = mesh.areas
    for indices, rule in element_groups(mesh, quad, corner_quad):
        points = quadrature_points(mesh, indices, rule)
        exact_values = evaluate_field(exact, points[..., 0], points[..., 1], indices)
        diff = u_h.evaluate_on_elements(rule.points, indices) - exact_values
        total += float(np.sum(areas[indices] * (diff**2 @ rule.weights)))
    return float(np.sqrt(total))
