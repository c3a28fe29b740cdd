# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
"""Linear finite elements: quadrature, assembly and Dirichlet solves."""
from .assembly import SparseSystem, apply_stiffness, assemble_load, assemble_mass, assemble_stiffness, dump_matrix
from .functions import (
    BoundaryFunction,
    EdgeFlux,
    FeFunction,
    NonFiniteValueError,
    basis_gradients,
    element_groups,
    evaluate_field,
    l2_error,
)
from .quadrature import (
    QuadratureRule,
    QuadratureScheme,
    corner_rule,
    default_scheme,
    gauss_legendre_edge,
    rule_of_degree,
    standard_rule,
)
from .solvers import DirichletSolver, SolverConvergenceError, solve_dirichlet
