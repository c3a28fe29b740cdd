# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

logger = logging.getLogger(__name__)

# symmetric 6-point rule, exact for degree 4
_A1 = 0.44594849091596488632
_W1 = 0.22338158967801146570
_A2 = 0.091576213509770743460
_W2 = 0.10995174365532186764


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Quadrature on the reference triangle.

    ``points`` are barycentric coordinates of shape (n, 3); ``weights`` are
    normalised to sum to 1, so element integrals are ``area * weights @ values``.
    No rule samples a triangle vertex.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3 or len(points) != len(weights):
            raise ValueError("Quadrature points must have shape (n, 3) matching the weights")
        if np.any(weights <= 0.0):
            raise ValueError("Quadrature weights must be positive")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.weights)

    def rotated(self, vertex):
        """The same rule with the barycentric roles shifted so that column 0 becomes ``vertex``."""
        return QuadratureRule(np.roll(self.points, vertex, axis=1), self.weights, self.degree)


def standard_rule():
    a1, b1 = _A1, 1.0 - 2.0 * _A1
    a2, b2 = _A2, 1.0 - 2.0 * _A2
    points = [
        [b1, a1, a1],
        [a1, b1, a1],
        [a1, a1, b1],
        [b2, a2, a2],
        [a2, b2, a2],
        [a2, a2, b2],
    ]
    weights = [_W1] * 3 + [_W2] * 3
    return QuadratureRule(np.array(points), np.array(weights), 4)


def corner_rule(degree=10):
    """Collapsed Gauss-Jacobi product rule concentrated at barycentric vertex 0.

    The Duffy map collapses one side of the unit square onto vertex 0; its
    Jacobian is absorbed into the Jacobi weight, which makes the rule
    accurate for integrands with an algebraic singularity at that vertex.
    """
    n = max(1, int(math.ceil((degree + 1) / 2)))
    s, ws = np.polynomial.legendre.leggauss(n)
    t, wt = roots_jacobi(n, 1.0, 0.0)
    u = 0.5 * (1.0 + s)
    v = 0.5 * (1.0 + t)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    weights = np.outer(ws, wt).ravel() / 4.0
    lam0 = vv.ravel()
    lam1 = (uu * (1.0 - vv)).ravel()
    lam2 = ((1.0 - uu) * (1.0 - vv)).ravel()
    return QuadratureRule(np.stack([lam0, lam1, lam2], axis=1), weights, 2 * n - 1)


def rule_of_degree(degree):
    """Cheapest bundled rule that is exact for polynomials of ``degree``."""
    if degree <= 4:
        return standard_rule()
    rule = corner_rule(degree)
    logger.debug("Using %d-point collapsed rule for degree %d", len(rule), degree)
    return rule


def gauss_legendre_edge(n=5):
    """Gauss-Legendre points on [0, 1] with weights summing to 1."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (1.0 + x), 0.5 * w


@dataclass(frozen=True)
class QuadratureScheme:
    """Rules chosen per element class, built from the ``quadrature`` settings."""

    standard: QuadratureRule
    corner: QuadratureRule
    edge_points: int = 5
    corner_edge_points: int = 10

    @classmethod
    def from_settings(cls, quadrature_settings=None):
        quadrature_settings = quadrature_settings or {}
        return cls(
            standard=rule_of_degree(quadrature_settings.get("standard_degree", 4)),
            corner=corner_rule(quadrature_settings.get("corner_degree", 10)),
            edge_points=quadrature_settings.get("edge_points", 5),
            corner_edge_points=quadrature_settings.get("corner_edge_points", 10),
        )


def default_scheme():
    return QuadratureScheme.from_settings()
