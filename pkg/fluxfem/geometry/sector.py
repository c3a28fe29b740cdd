# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
from dataclasses import dataclass, field

import numpy as np

# Points of the square boundary at the polar angles k*pi/4, k = 0..7.
_SQUARE_POINTS = np.array(
    [
        [1.0, 0.0],
        [1.0, 1.0],
        [0.0, 1.0],
        [-1.0, 1.0],
        [-1.0, 0.0],
        [-1.0, -1.0],
        [0.0, -1.0],
        [1.0, -1.0],
    ]
)
_ANGLE_TOL = 1e-12
_CHUNK = 65536


class DomainError(ValueError):
    pass


def _snap(value):
    for target in (-1.0, 0.0, 1.0):
        if abs(value - target) < 1e-12:
            return target
    return value


def ray_exit_point(omega):
    """Point where the ray at polar angle ``omega`` leaves the square (-1,1)^2."""
    c, s = np.cos(omega), np.sin(omega)
    scale = max(abs(c), abs(s))
    return np.array([_snap(c / scale), _snap(s / scale)])


@dataclass(frozen=True, eq=False)
class SectorDomain:
    """The clipped sector (-1,1)^2 ∩ {(r cos φ, r sin φ): 0 < φ < ω}.

    ``corner_list`` is the closed, counter-clockwise polygon (first point
    repeated at the end) starting at the origin, whose interior angle is ω.
    """

    omega: float
    corner_list: np.ndarray = field(init=False, repr=False)
    lambda_bar: float = field(init=False)

    def __post_init__(self):
        omega = float(self.omega)
        if not (np.pi / 2 - _ANGLE_TOL <= omega < 2 * np.pi - _ANGLE_TOL):
            raise DomainError(f"Opening angle {omega} outside [pi/2, 2*pi)")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "lambda_bar", np.pi / omega)

        corners = [np.zeros(2), _SQUARE_POINTS[0]]
        for k in (1, 3, 5, 7):
            if k * np.pi / 4 < omega - _ANGLE_TOL:
                corners.append(_SQUARE_POINTS[k])
        exit_point = ray_exit_point(omega)
        if not np.array_equal(exit_point, corners[-1]):
            corners.append(exit_point)
        corners.append(np.zeros(2))
        corner_list = np.array(corners)
        corner_list.setflags(write=False)
        object.__setattr__(self, "corner_list", corner_list)

    @classmethod
    def from_degrees(cls, degrees):
        return cls(np.deg2rad(float(degrees)))

    @property
    def degrees(self):
        return float(np.rad2deg(self.omega))

    @property
    def is_convex(self):
        return self.omega <= np.pi + _ANGLE_TOL

    @property
    def segments(self):
        """Boundary segments as an array of shape (K, 2, 2)."""
        return np.stack([self.corner_list[:-1], self.corner_list[1:]], axis=1)

    @property
    def area(self):
        x, y = self.corner_list[:, 0], self.corner_list[:, 1]
        return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))

    @property
    def perimeter(self):
        return float(np.sum(np.linalg.norm(np.diff(self.corner_list, axis=0), axis=1)))

    def fan_points(self):
        """Outer points of the coarse fan triangulation, ordered by polar angle.

        These are the square points at the angles k*pi/4 below ω, followed by
        the exit point of the ray φ = ω.
        """
        points = [
            _SQUARE_POINTS[k] for k in range(8) if k * np.pi / 4 < self.omega - _ANGLE_TOL
        ]
        exit_point = ray_exit_point(self.omega)
        if not np.array_equal(exit_point, points[-1]):
            points.append(exit_point)
        return np.array(points)


def distance_to_boundary(domain, points):
    """Euclidean distance of each point (shape (n, 2)) to the polygon boundary."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    seg = domain.segments
    start = seg[:, 0, :][None, :, :]
    direction = (seg[:, 1, :] - seg[:, 0, :])[None, :, :]
    length_sq = np.sum(direction**2, axis=2)
    out = np.empty(len(points))
    for lo in range(0, len(points), _CHUNK):
        chunk = points[lo : lo + _CHUNK, None, :]
        t = np.clip(np.sum((chunk - start) * direction, axis=2) / length_sq, 0.0, 1.0)
        nearest = start + t[:, :, None] * direction
        out[lo : lo + _CHUNK] = np.min(np.linalg.norm(chunk - nearest, axis=2), axis=1)
    return out
