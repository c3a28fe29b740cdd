# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
import logging
import math
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import SparseSystem, assemble_load, assemble_stiffness
from .functions import BoundaryFunction, FeFunction

logger = logging.getLogger(__name__)

SOLVER_METHODS = ("cg", "direct", "dense")


class SolverConvergenceError(RuntimeError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class DirichletSolver:
    """Solves -Δu = f with Dirichlet data on a fixed mesh.

    The stiffness matrix and the interior block are assembled once, so
    repeated solves (as in the control iteration) only pay for the solve.

    :param method: ``cg`` (Jacobi preconditioned conjugate gradients),
        ``direct`` (sparse LU, factorised once) or ``dense``
    :param direct_rtol: relative residual accepted from the factorised solves
    """

    def __init__(
        self, mesh, method="cg", cg_rtol=1e-12, cg_maxiter_factor=20, dense_max_dofs=500, direct_rtol=1e-8
    ):
        if method not in SOLVER_METHODS:
            raise ValueError(f"Unknown solver method {method!r}, expected one of {SOLVER_METHODS}")
        self.mesh = mesh
        self.method = method
        self.cg_rtol = cg_rtol
        self.cg_maxiter_factor = cg_maxiter_factor
        self.dense_max_dofs = dense_max_dofs
        self.direct_rtol = direct_rtol
        self.solve_count = 0
        self.cg_iterations = 0

    @classmethod
    def from_settings(cls, mesh, solver_settings):
        return cls(
            mesh,
            method=solver_settings["method"],
            cg_rtol=solver_settings["cg_rtol"],
            cg_maxiter_factor=solver_settings["cg_maxiter_factor"],
            dense_max_dofs=solver_settings["dense_max_dofs"],
            direct_rtol=solver_settings["direct_rtol"],
        )

    @cached_property
    def stiffness(self):
        return assemble_stiffness(self.mesh)

    @cached_property
    def _coupling(self):
        free, constrained = self.mesh.interior_vertices, self.mesh.boundary_vertices
        rows = self.stiffness[free]
        return rows[:, free].tocsc(), rows[:, constrained].tocsr()

    @cached_property
    def _inverse_diagonal(self):
        return 1.0 / self._coupling[0].diagonal()

    @cached_property
    def _lu(self):
        return spla.splu(self._coupling[0])

    @cached_property
    def _cholesky(self):
        return scipy.linalg.cho_factor(self._coupling[0].toarray())

    def system(self, load, dirichlet_values):
        return SparseSystem.eliminate(self.mesh, self.stiffness, load, dirichlet_values)

    def solve(self, load=None, dirichlet_values=None):
        """Discrete solution for a load vector and boundary vertex values.

        Either argument may be ``None`` for zero data.

        :return: FeFunction equal to ``dirichlet_values`` on Γ
        :raises SolverConvergenceError: if CG misses the tolerance or a
            factorised solve leaves a residual above ``direct_rtol``
        """
        mesh = self.mesh
        free, constrained = mesh.interior_vertices, mesh.boundary_vertices
        load = np.zeros(mesh.n_vertices) if load is None else np.asarray(load, dtype=float)
        g = np.zeros(len(constrained)) if dirichlet_values is None else np.asarray(dirichlet_values, dtype=float)

        values = np.empty(mesh.n_vertices)
        values[constrained] = g
        if not len(free):
            return FeFunction(mesh, values)
        interior, coupling = self._coupling
        rhs = load[free] - coupling @ g
        self.solve_count += 1
        values[free] = self._solve_interior(interior, rhs)
        return FeFunction(mesh, values)

    def _solve_interior(self, matrix, rhs):
        if not np.any(rhs):
            return np.zeros_like(rhs)
        if self.method == "direct":
            return self._checked(matrix, self._lu.solve(rhs), rhs)
        if self.method == "dense":
            return self._checked(matrix, scipy.linalg.cho_solve(self._cholesky, rhs), rhs)
        try:
            return self._solve_cg(matrix, rhs)
        except SolverConvergenceError:
            if len(rhs) > self.dense_max_dofs:
                raise
            logger.warning("CG did not converge on %d dofs, falling back to a dense solve", len(rhs))
            return self._checked(matrix, scipy.linalg.cho_solve(self._cholesky, rhs), rhs)

    def _checked(self, matrix, solution, rhs):
        residual = float(np.linalg.norm(matrix @ solution - rhs) / np.linalg.norm(rhs))
        if not residual <= self.direct_rtol:
            raise SolverConvergenceError(
                f"{self.method} solve left relative residual {residual:.3e} on {len(rhs)} dofs",
                residual=residual,
                iterations=0,
            )
        return solution

    def _solve_cg(self, matrix, rhs):
        n = len(rhs)
        maxiter = max(1, int(math.ceil(self.cg_maxiter_factor * math.sqrt(n))))
        preconditioner = sp.diags(self._inverse_diagonal)
        iterations = 0

        def count(_):
            nonlocal iterations
            iterations += 1

        solution, info = spla.cg(
            matrix, rhs, rtol=self.cg_rtol, atol=0.0, maxiter=maxiter, M=preconditioner, callback=count
        )
        residual = float(np.linalg.norm(matrix @ solution - rhs) / np.linalg.norm(rhs))
        self.cg_iterations += iterations
        if info != 0:
            raise SolverConvergenceError(
                f"CG stopped after {iterations} iterations at relative residual {residual:.3e}",
                residual=residual,
                iterations=iterations,
            )
        logger.debug("CG converged in %d iterations (residual %.2e, %d dofs)", iterations, residual, n)
        return solution


def _boundary_values(mesh, g):
    if g is None:
        return None
    if isinstance(g, BoundaryFunction):
        return g.coefficients
    if callable(g):
        return BoundaryFunction.interpolate(mesh, g).coefficients
    return np.asarray(g, dtype=float)


def solve_dirichlet(mesh, f=None, g=None, quad=None, corner_quad=None, solver=None):
    """Galerkin solution of -Δu = f in Ω, u = g on Γ.

    :param f: scalar field ``f(x, y)`` or ``None`` for zero
    :param g: scalar field sampled at the boundary vertices, a
        :class:`BoundaryFunction`, a vector of boundary values or ``None``
    :param solver: a :class:`DirichletSolver` for ``mesh`` to reuse
    """
    solver = DirichletSolver(mesh) if solver is None else solver
    load = assemble_load(mesh, f, quad, corner_quad)
    return solver.solve(load, _boundary_values(mesh, g))
