# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
"""Sector domains, triangulations and newest-vertex bisection."""
from .edge_table import EdgeNotFoundError, EdgeTable, decode_keys, edge_keys
from .mesh import (
    DegenerateElementError,
    Mesh,
    NonConformingMeshError,
    dump_mesh,
    element_distance_to_boundary,
    element_distances,
    grading_bound,
    initial_mesh,
    load_mesh,
    mesh_statistics,
    minimum_angle,
)
from .refinement import (
    GradingError,
    GradingPolicy,
    bisect,
    global_sweep_count,
    grading_violations,
    refine_graded,
    refine_uniform,
)
from .sector import DomainError, SectorDomain, distance_to_boundary, ray_exit_point
