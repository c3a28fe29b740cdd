# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
"""Linear finite elements on boundary-concentrated meshes.

Boundary flux approximation (classical and discrete variational normal
derivatives) and Dirichlet boundary control, with a convergence-study driver.
"""
__version__ = "0.1.1"
