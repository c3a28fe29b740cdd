# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
"""Normal derivatives of discrete solutions and their L²(Γ) errors.

Two approximations of ∂u/∂n are provided: the classical one, which is the
elementwise gradient dotted with the outward normal, and the discrete
variational one, which is the boundary function reproducing the Green's
identity residual ``(∇u_h, ∇w_h) - (f, w_h)`` against every discrete test
function ``w_h``.
"""
import logging

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fem.assembly import assemble_load, assemble_stiffness
from .fem.functions import BoundaryFunction, EdgeFlux, NonFiniteValueError
from .fem.quadrature import gauss_legendre_edge

logger = logging.getLogger(__name__)

_LOCAL_EDGE_MASS = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
_MASS_SOLVE_RTOL = 1e-12


class ConsistencyError(RuntimeError):
    pass


def classical_flux(mesh, u_h):
    """∇(u_h|_T)·n on every boundary edge, T being the edge's parent triangle."""
    gradients = u_h.gradients()[mesh.boundary_parents]
    return EdgeFlux(mesh, np.sum(gradients * mesh.boundary_normals, axis=1))


def boundary_mass_matrix(mesh):
    """Mass matrix of the boundary trace space, indexed by boundary dof."""
    dof = mesh.boundary_dof_map[mesh.boundary_edges]
    local = mesh.boundary_lengths[:, None, None] * _LOCAL_EDGE_MASS[None, :, :]
    rows = np.repeat(dof[:, :, None], 2, axis=2)
    cols = np.repeat(dof[:, None, :], 2, axis=1)
    n = len(mesh.boundary_vertices)
    matrix = sp.coo_matrix((local.ravel(), (rows.ravel(), cols.ravel())), shape=(n, n)).tocsr()
    return (0.5 * (matrix + matrix.T)).tocsc()


def edge_groups(mesh, edge_points=5, corner_edge_points=None):
    """Boundary edges split into ``(indices, s, weights)`` Gauss groups.

    On non-convex domains the edges touching the reentrant corner get
    ``corner_edge_points`` points (10 unless given).
    """
    s, w = gauss_legendre_edge(edge_points)
    at_corner = mesh.corner_boundary_edges
    if mesh.domain.is_convex or not at_corner.any():
        return [(np.arange(len(mesh.boundary_edges)), s, w)]
    sc, wc = gauss_legendre_edge(corner_edge_points or 10)
    return [(np.flatnonzero(~at_corner), s, w), (np.flatnonzero(at_corner), sc, wc)]


def evaluate_boundary_field(q, mesh, indices, s):
    """Values of ``q(x, y, nx, ny)`` at parameters ``s`` on the boundary edges ``indices``.

    :raises NonFiniteValueError: naming the first offending edge
    """
    edges = mesh.boundary_edges[indices]
    start = mesh.vertices[edges[:, 0]][:, None, :]
    end = mesh.vertices[edges[:, 1]][:, None, :]
    points = (1.0 - s)[None, :, None] * start + s[None, :, None] * end
    normals = np.broadcast_to(mesh.boundary_normals[indices][:, None, :], points.shape)
    values = np.asarray(q(points[..., 0], points[..., 1], normals[..., 0], normals[..., 1]), dtype=float)
    values = np.broadcast_to(values, points.shape[:2])
    finite = np.isfinite(values)
    if not finite.all():
        edge = int(indices[np.argwhere(~finite)[0][0]])
        raise NonFiniteValueError(f"Boundary field is not finite on edge {edge}", edge=edge)
    return values


def _edge_values(approx, mesh, indices, s):
    if callable(approx):
        return evaluate_boundary_field(approx, mesh, indices, s)
    return approx.edge_values(s)[indices]


def flux_error_l2(mesh, approx, exact_flux, edge_points=5, corner_edge_points=None):
    """L²(Γ) distance between ``approx`` and the boundary field ``exact_flux``.

    ``approx`` is an :class:`EdgeFlux`, a :class:`BoundaryFunction` or itself
    a boundary field. Corner points are never sampled.
    """
    lengths = mesh.boundary_lengths
    total = 0.0
    for indices, s, w in edge_groups(mesh, edge_points, corner_edge_points):
        diff = _edge_values(approx, mesh, indices, s) - evaluate_boundary_field(exact_flux, mesh, indices, s)
        total += float(np.sum(lengths[indices] * (diff**2 @ w)))
    return float(np.sqrt(total))


def boundary_moments(mesh, v, edge_points=5, corner_edge_points=None):
    """m_i = ∫_Γ v ψ_i for the boundary hat functions ψ_i."""
    dof = mesh.boundary_dof_map[mesh.boundary_edges]
    lengths = mesh.boundary_lengths
    moments = np.zeros(len(mesh.boundary_vertices))
    for indices, s, w in edge_groups(mesh, edge_points, corner_edge_points):
        weighted = lengths[indices, None] * evaluate_boundary_field(v, mesh, indices, s) * w[None, :]
        moments += np.bincount(dof[indices, 0], weighted @ (1.0 - s), minlength=len(moments))
        moments += np.bincount(dof[indices, 1], weighted @ s, minlength=len(moments))
    return moments


def solve_boundary_mass(mass, rhs):
    """Solve M_Γ d = rhs and check the residual."""
    if not np.any(rhs):
        return np.zeros_like(rhs)
    solution = spla.spsolve(mass, rhs)
    residual = np.linalg.norm(mass @ solution - rhs)
    if not residual <= _MASS_SOLVE_RTOL * np.linalg.norm(rhs):
        raise ConsistencyError(f"Boundary mass solve left residual {residual:.3e}")
    return solution


def flux_from_residual(mesh, residual, scale, tol=1e-10, mass=None):
    """Boundary function whose moments are the boundary rows of ``residual``.

    The interior rows of ``residual`` must vanish up to ``tol * scale``.

    :raises ConsistencyError: otherwise
    """
    interior = residual[mesh.interior_vertices]
    if interior.size:
        worst = float(np.max(np.abs(interior)))
        if worst > tol * max(scale, np.finfo(float).tiny):
            raise ConsistencyError(
                f"Interior residual {worst:.3e} exceeds {tol:g} x {scale:.3e}; "
                "the discrete function does not solve its Galerkin equations"
            )
    mass = boundary_mass_matrix(mesh) if mass is None else mass
    return BoundaryFunction(mesh, solve_boundary_mass(mass, residual[mesh.boundary_vertices]))


def variational_flux(mesh, u_h, f, quad=None, corner_quad=None, stiffness=None, load=None, tol=1e-10):
    """Discrete variational normal derivative of the Galerkin solution ``u_h``.

    :param load: precomputed load vector of ``f``, assembled if omitted
    :raises ConsistencyError: if the interior rows of A u_h - b do not vanish
    """
    stiffness = assemble_stiffness(mesh) if stiffness is None else stiffness
    load = assemble_load(mesh, f, quad, corner_quad) if load is None else load
    applied = stiffness @ u_h.coefficients
    scale = np.linalg.norm(applied) + np.linalg.norm(load)
    return flux_from_residual(mesh, applied - load, scale, tol)


def boundary_integral(mesh, d, mass=None):
    """(d, 1) over Γ for a boundary function ``d``."""
    mass = boundary_mass_matrix(mesh) if mass is None else mass
    return float(np.sum(mass @ d.coefficients))


def compatibility_residual(mesh, d, load):
    """Relative defect of (d, 1)_Γ + (f, 1)_Ω = 0, ``load`` being the load vector of f."""
    flux_total = boundary_integral(mesh, d)
    source_total = float(np.sum(load))
    scale = max(abs(flux_total), abs(source_total))
    if scale == 0.0:
        return 0.0
    return abs(flux_total + source_total) / scale
