# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
import numpy as np

GRADING_BOUNDARY_CONCENTRATED = "boundary_concentrated"
GRADING_QUASI_UNIFORM = "quasi_uniform"
GRADING_MODES = (GRADING_BOUNDARY_CONCENTRATED, GRADING_QUASI_UNIFORM)

EXPERIMENT_FLUX = "flux"
EXPERIMENT_CONTROL = "control"
EXPERIMENT_COMPARE = "compare"
EXPERIMENTS = (EXPERIMENT_FLUX, EXPERIMENT_CONTROL, EXPERIMENT_COMPARE)

# (opening angle, element count of the coarse fan mesh)
COARSE_MESH_SIZES = (
    (np.pi / 2, 2),
    (2 * np.pi / 3, 3),
    (3 * np.pi / 4, 3),
    (5 * np.pi / 4, 5),
    (3 * np.pi / 2, 6),
    (7 * np.pi / 4, 7),
)

# Relative tolerance for "equal length" when choosing a longest edge.
EDGE_TIE_RTOL = 1e-12

SEED_ENV_VAR = "FLUXFEM_SEED"
