# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
"""Discrete Dirichlet boundary control.

Minimises ``½‖y - y_d‖² + (α/2)‖u‖²_Γ`` subject to ``-Δy = f`` in Ω and
``y = u`` on Γ, with ``u`` in the trace space of the linear elements. The
state and adjoint are eliminated so that only the control coefficients
remain; the resulting boundary equation is solved by restarted GMRES.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import scipy.sparse.linalg as spla

from .fem.assembly import assemble_load, assemble_mass, assemble_stiffness
from .fem.functions import BoundaryFunction, FeFunction, l2_error
from .fem.quadrature import QuadratureRule
from .fem.solvers import DirichletSolver, SolverConvergenceError
from .flux import boundary_mass_matrix, boundary_moments, flux_error_l2, flux_from_residual, solve_boundary_mass

logger = logging.getLogger(__name__)


class ControlSolverError(SolverConvergenceError):
    def __init__(self, message, residual=None, iterations=None, history=None):
        super().__init__(message, residual=residual, iterations=iterations)
        self.history = list(history or [])


@dataclass(frozen=True, eq=False)
class ControlProblem:
    mesh: object
    alpha: float
    f_state: Optional[Callable] = None
    y_desired: Optional[Callable] = None
    quad: Optional[QuadratureRule] = None
    corner_quad: Optional[QuadratureRule] = None
    restart: int = 50
    rtol: float = 1e-10
    maxiter: int = 500
    interior_tol: float = 1e-10
    optimality_tol: float = 1e-9
    edge_points: int = 5
    corner_edge_points: int = 10

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @classmethod
    def from_benchmark(cls, mesh, bench, settings=None, quad=None, corner_quad=None):
        """Problem for a :class:`~fluxfem.manufactured.ControlBenchmark` on ``mesh``."""
        extra = {}
        if settings is not None:
            control, checks, quadrature = settings["control"], settings["checks"], settings["quadrature"]
            extra = dict(
                restart=control["gmres_restart"],
                rtol=control["gmres_rtol"],
                maxiter=control["gmres_maxiter"],
                interior_tol=checks["interior_residual_tol"],
                optimality_tol=checks["optimality_tol"],
                edge_points=quadrature["edge_points"],
                corner_edge_points=quadrature["corner_edge_points"],
            )
        return cls(
            mesh=mesh,
            alpha=bench.alpha,
            f_state=bench.f_state,
            y_desired=bench.y_desired,
            quad=quad,
            corner_quad=corner_quad,
            **extra,
        )


@dataclass
class KrylovStats:
    iterations: int = 0
    residual: float = 0.0
    history: List[float] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class ControlSolution:
    u_h: BoundaryFunction
    y_h: FeFunction
    p_h: FeFunction
    krylov_stats: KrylovStats
    adjoint_flux: Optional[BoundaryFunction] = None


def discrete_harmonic_extension(mesh, g, f=None, solver=None, load=None, quad=None, corner_quad=None):
    """Discrete solution with trace ``g`` and source ``f`` (B_h g when f = 0)."""
    solver = DirichletSolver(mesh) if solver is None else solver
    if load is None:
        load = assemble_load(mesh, f, quad, corner_quad)
    return solver.solve(load, g.coefficients)


def l2_boundary_projection(mesh, v, mass=None, edge_points=5, corner_edge_points=None):
    """L²(Γ) projection of the boundary field ``v`` onto the trace space."""
    mass = boundary_mass_matrix(mesh) if mass is None else mass
    moments = boundary_moments(mesh, v, edge_points, corner_edge_points)
    return BoundaryFunction(mesh, solve_boundary_mass(mass, moments))


def _adjoint_residual(stiffness, mass, p_h, y_h, desired_load):
    return stiffness @ p_h.coefficients - (mass @ y_h.coefficients - desired_load)


def adjoint_flux(
    mesh, p_h, y_h, y_desired, stiffness=None, mass=None, boundary_mass=None, desired_load=None, tol=1e-10, quad=None, corner_quad=None
):
    """Discrete variational normal derivative of the adjoint state.

    Boundary rows of ``A p_h - (y_h - y_d, φ_i)`` are converted into a trace
    function; the interior rows have to vanish.

    :raises ConsistencyError: if ``p_h`` is not the adjoint of ``y_h``
    """
    stiffness = assemble_stiffness(mesh) if stiffness is None else stiffness
    mass = assemble_mass(mesh) if mass is None else mass
    if desired_load is None:
        desired_load = assemble_load(mesh, y_desired, quad, corner_quad)
    residual = _adjoint_residual(stiffness, mass, p_h, y_h, desired_load)
    scale = (
        np.linalg.norm(stiffness @ p_h.coefficients)
        + np.linalg.norm(mass @ y_h.coefficients)
        + np.linalg.norm(desired_load)
    )
    return flux_from_residual(mesh, residual, scale, tol, boundary_mass)


class ReducedOperator:
    """Control-to-optimality-defect map on the boundary coefficients.

    ``apply(u)`` returns ``α M_Γ u - G(u)`` where ``G(u)`` are the boundary
    rows of the adjoint residual produced by the control ``u`` with zero
    source and zero desired state. The map is linear, symmetric and
    positive definite.
    """

    def __init__(self, mesh, alpha, solver=None):
        self.mesh = mesh
        self.alpha = alpha
        self.solver = DirichletSolver(mesh) if solver is None else solver
        self.mass = assemble_mass(mesh)
        self.boundary_mass = boundary_mass_matrix(mesh)
        self.applications = 0

    @property
    def size(self):
        return len(self.mesh.boundary_vertices)

    def state(self, u, source_load=None):
        return self.solver.solve(source_load, u)

    def adjoint(self, y_h, desired_load=None):
        load = self.mass @ y_h.coefficients
        if desired_load is not None:
            load = load - desired_load
        return self.solver.solve(load, None)

    def boundary_residual(self, p_h, y_h, desired_load=None):
        desired_load = np.zeros(self.mesh.n_vertices) if desired_load is None else desired_load
        residual = _adjoint_residual(self.solver.stiffness, self.mass, p_h, y_h, desired_load)
        return residual[self.mesh.boundary_vertices]

    def apply(self, u):
        self.applications += 1
        u = np.asarray(u, dtype=float).ravel()
        y_h = self.state(u)
        p_h = self.adjoint(y_h)
        return self.alpha * (self.boundary_mass @ u) - self.boundary_residual(p_h, y_h)

    def affine_part(self, source_load, desired_load):
        """G(0) for the given data, the right-hand side of the reduced equation."""
        y0 = self.state(None, source_load)
        p0 = self.adjoint(y0, desired_load)
        return self.boundary_residual(p0, y0, desired_load)

    def as_linear_operator(self):
        n = self.size
        return spla.LinearOperator((n, n), matvec=self.apply, dtype=float)


def solve_control(problem, solver=None):
    """Optimal control, state and adjoint of ``problem``.

    :raises ControlSolverError: if GMRES misses its tolerance within
        ``problem.maxiter`` iterations or the returned triple violates the
        optimality system
    """
    mesh = problem.mesh
    operator = ReducedOperator(mesh, problem.alpha, solver)
    source_load = assemble_load(mesh, problem.f_state, problem.quad, problem.corner_quad)
    desired_load = assemble_load(mesh, problem.y_desired, problem.quad, problem.corner_quad)
    rhs = operator.affine_part(source_load, desired_load)

    stats = KrylovStats()
    if not np.any(rhs):
        u = np.zeros(operator.size)
    else:
        def record(residual_norm):
            stats.history.append(float(residual_norm))

        cycles = max(1, int(math.ceil(problem.maxiter / problem.restart)))
        u, info = spla.gmres(
            operator.as_linear_operator(),
            rhs,
            rtol=problem.rtol,
            atol=0.0,
            restart=problem.restart,
            maxiter=cycles,
            callback=record,
            callback_type="pr_norm",
        )
        stats.iterations = len(stats.history)
        stats.residual = float(np.linalg.norm(operator.apply(u) - rhs) / np.linalg.norm(rhs))
        if info != 0:
            raise ControlSolverError(
                f"GMRES stopped after {stats.iterations} iterations at relative residual {stats.residual:.3e}",
                residual=stats.residual,
                iterations=stats.iterations,
                history=stats.history,
            )
        logger.info(
            "GMRES converged in %d iterations (residual %.2e, %d boundary dofs)",
            stats.iterations,
            stats.residual,
            operator.size,
        )

    u_h = BoundaryFunction(mesh, u)
    y_h = operator.state(u_h.coefficients, source_load)
    p_h = operator.adjoint(y_h, desired_load)
    d = adjoint_flux(
        mesh,
        p_h,
        y_h,
        problem.y_desired,
        stiffness=operator.solver.stiffness,
        mass=operator.mass,
        boundary_mass=operator.boundary_mass,
        desired_load=desired_load,
        tol=problem.interior_tol,
    )
    solution = ControlSolution(u_h=u_h, y_h=y_h, p_h=p_h, krylov_stats=stats, adjoint_flux=d)

    residuals = optimality_residuals(solution, problem, operator, source_load, desired_load)
    worst = max(residuals.values())
    if worst > problem.optimality_tol:
        raise ControlSolverError(
            f"Optimality system violated: {residuals}",
            residual=worst,
            iterations=stats.iterations,
            history=stats.history,
        )
    return solution


def _relative(defect, reference):
    defect = float(np.linalg.norm(defect))
    reference = float(np.linalg.norm(reference))
    if reference == 0.0:
        return defect
    return defect / reference


def optimality_residuals(solution, problem, operator=None, source_load=None, desired_load=None):
    """Relative residuals of the state, adjoint and control equations.

    Returns a dict with keys ``state``, ``adjoint`` and ``optimality``;
    Dirichlet traces that do not match exactly count as infinite residual.
    """
    mesh = problem.mesh
    operator = ReducedOperator(mesh, problem.alpha) if operator is None else operator
    if source_load is None:
        source_load = assemble_load(mesh, problem.f_state, problem.quad, problem.corner_quad)
    if desired_load is None:
        desired_load = assemble_load(mesh, problem.y_desired, problem.quad, problem.corner_quad)
    stiffness, mass = operator.solver.stiffness, operator.mass
    interior, boundary = mesh.interior_vertices, mesh.boundary_vertices
    y, p, u = solution.y_h.coefficients, solution.p_h.coefficients, solution.u_h.coefficients

    state = (stiffness @ y - source_load)[interior]
    adjoint = _adjoint_residual(stiffness, mass, solution.p_h, solution.y_h, desired_load)
    moments = adjoint[boundary]
    residuals = {
        "state": _relative(state, source_load[interior] - stiffness[interior][:, boundary] @ u),
        "adjoint": _relative(adjoint[interior], (mass @ y - desired_load)[interior]),
        "optimality": _relative(problem.alpha * (operator.boundary_mass @ u) - moments, moments),
    }
    if not np.array_equal(y[boundary], u):
        residuals["state"] = math.inf
    if np.any(p[boundary] != 0.0):
        residuals["adjoint"] = math.inf
    return residuals


def control_errors(solution, bench, quad=None, corner_quad=None, edge_points=5, corner_edge_points=None):
    """``(‖u - u_h‖ on Γ, ‖y - y_h‖ in Ω)`` against the exact benchmark solution."""
    mesh = solution.u_h.mesh
    err_u = flux_error_l2(mesh, solution.u_h, bench.u_exact, edge_points, corner_edge_points)
    err_y = l2_error(mesh, solution.y_h, bench.y_exact, quad, corner_quad)
    return err_u, err_y
