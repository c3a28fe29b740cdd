# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
import logging
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from ..constants import EDGE_TIE_RTOL
from .edge_table import EdgeTable, edge_keys
from .sector import SectorDomain, distance_to_boundary

logger = logging.getLogger(__name__)

# Local edge e of a triangle is the edge opposite local vertex e.
_EDGE_START = np.array([1, 2, 0])
_EDGE_END = np.array([2, 0, 1])
_ON_BOUNDARY_TOL = 1e-12


class DegenerateElementError(ValueError):
    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


class NonConformingMeshError(ValueError):
    pass


def _readonly(array):
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation of a :class:`SectorDomain`.

    Triangles are stored counter-clockwise. ``refinement_edge[t]`` is the
    local index of the vertex opposite the refinement edge of triangle ``t``.
    Boundary edges are oriented so that the domain lies to their left; their
    normals point outward from the parent triangle.

    Instances are immutable; refinement returns new meshes.
    """

    domain: SectorDomain
    vertices: np.ndarray
    triangles: np.ndarray
    refinement_edge: np.ndarray
    boundary_edges: np.ndarray
    boundary_normals: np.ndarray
    boundary_parents: np.ndarray
    boundary_vertex_flags: np.ndarray
    corner_flags: np.ndarray
    level_h: float = 1.0

    @classmethod
    def from_triangles(
        cls,
        domain,
        vertices,
        triangles,
        refinement_edge=None,
        level_h=1.0,
        validate=True,
        check_boundary=True,
    ):
        """Build a mesh and derive its boundary from the element topology.

        :raises DegenerateElementError: if ``validate`` and a triangle has
            non-positive signed area.
        :raises NonConformingMeshError: if an edge has more than two
            triangles, or (with ``check_boundary``) a boundary edge does not
            lie on the polygon boundary, which is how hanging nodes show up.
        """
        vertices = np.array(vertices, dtype=float).reshape(-1, 2)
        triangles = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        if refinement_edge is None:
            refinement_edge = np.zeros(len(triangles), dtype=np.int8)
        refinement_edge = np.array(refinement_edge, dtype=np.int8)

        if validate:
            areas = _signed_areas(vertices, triangles)
            bad = np.flatnonzero(areas <= 0.0)
            if bad.size:
                raise DegenerateElementError(
                    f"Triangle {bad[0]} has non-positive area {areas[bad[0]]}", element=int(bad[0])
                )

        start = triangles[:, _EDGE_START].ravel()
        end = triangles[:, _EDGE_END].ravel()
        _, first_index, counts = np.unique(
            edge_keys(start, end), return_index=True, return_counts=True
        )
        if counts.size and counts.max() > 2:
            raise NonConformingMeshError("An edge is shared by more than two triangles")
        boundary_index = first_index[counts == 1]
        boundary_edges = np.stack([start[boundary_index], end[boundary_index]], axis=1)
        boundary_parents = boundary_index // 3

        tangent = vertices[boundary_edges[:, 1]] - vertices[boundary_edges[:, 0]]
        length = np.linalg.norm(tangent, axis=1)
        boundary_normals = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1) / length[:, None]

        flags = np.zeros(len(vertices), dtype=bool)
        flags[boundary_edges.ravel()] = True

        if check_boundary and len(boundary_edges):
            midpoints = 0.5 * (
                vertices[boundary_edges[:, 0]] + vertices[boundary_edges[:, 1]]
            )
            off = np.flatnonzero(distance_to_boundary(domain, midpoints) > _ON_BOUNDARY_TOL)
            if off.size:
                raise NonConformingMeshError(
                    f"{off.size} boundary edge(s) do not lie on the domain boundary "
                    f"(hanging node near {midpoints[off[0]]})"
                )

        corner_flags = np.zeros(len(vertices), dtype=bool)
        for corner in domain.corner_list[:-1]:
            corner_flags |= np.all(np.abs(vertices - corner) < _ON_BOUNDARY_TOL, axis=1)

        return cls(
            domain=domain,
            vertices=_readonly(vertices),
            triangles=_readonly(triangles),
            refinement_edge=_readonly(refinement_edge),
            boundary_edges=_readonly(boundary_edges),
            boundary_normals=_readonly(boundary_normals),
            boundary_parents=_readonly(boundary_parents),
            boundary_vertex_flags=_readonly(flags),
            corner_flags=_readonly(corner_flags),
            level_h=float(level_h),
        )

    def with_level(self, level_h):
        return replace(self, level_h=float(level_h))

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @cached_property
    def signed_areas(self):
        return _signed_areas(self.vertices, self.triangles)

    @property
    def areas(self):
        return np.abs(self.signed_areas)

    @property
    def area(self):
        return float(np.sum(self.areas))

    @cached_property
    def edge_lengths(self):
        """Lengths of the local edges, shape (n_triangles, 3)."""
        p = self.vertices[self.triangles]
        return np.linalg.norm(p[:, _EDGE_END] - p[:, _EDGE_START], axis=2)

    @property
    def diameters(self):
        return np.max(self.edge_lengths, axis=1)

    @cached_property
    def boundary_vertices(self):
        """Sorted indices of the boundary vertices (boundary dof order)."""
        return np.flatnonzero(self.boundary_vertex_flags)

    @cached_property
    def interior_vertices(self):
        return np.flatnonzero(~self.boundary_vertex_flags)

    @cached_property
    def boundary_dof_map(self):
        """Vertex index -> boundary dof index, -1 for interior vertices."""
        dof = np.full(self.n_vertices, -1, dtype=np.int64)
        dof[self.boundary_vertices] = np.arange(len(self.boundary_vertices))
        return dof

    @property
    def boundary_lengths(self):
        tangent = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        return np.linalg.norm(tangent, axis=1)

    @cached_property
    def singular_corner(self):
        """Index of the vertex at the origin, -1 if there is none."""
        hits = np.flatnonzero(np.all(self.vertices == 0.0, axis=1))
        return int(hits[0]) if hits.size else -1

    @cached_property
    def corner_triangles(self):
        """Mask of the triangles touching the singular corner."""
        if self.singular_corner < 0:
            return np.zeros(self.n_triangles, dtype=bool)
        return np.any(self.triangles == self.singular_corner, axis=1)

    @cached_property
    def corner_boundary_edges(self):
        """Mask of the boundary edges touching the singular corner."""
        if self.singular_corner < 0:
            return np.zeros(len(self.boundary_edges), dtype=bool)
        return np.any(self.boundary_edges == self.singular_corner, axis=1)

    def interior_edge_counts(self):
        """Number of triangles per undirected edge, keyed like :func:`edge_keys`."""
        start = self.triangles[:, _EDGE_START].ravel()
        end = self.triangles[:, _EDGE_END].ravel()
        keys, counts = np.unique(edge_keys(start, end), return_counts=True)
        return keys, counts


def _signed_areas(vertices, triangles):
    p = vertices[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def longest_edge(vertices, triangles, rtol=EDGE_TIE_RTOL):
    """Local index of the longest edge of each triangle.

    Ties are broken by the smallest global index of the opposite vertex.
    """
    p = vertices[triangles]
    lengths = np.linalg.norm(p[:, _EDGE_END] - p[:, _EDGE_START], axis=2)
    longest = lengths.max(axis=1, keepdims=True)
    candidates = lengths >= longest * (1.0 - rtol)
    opposite = np.where(candidates, triangles, np.iinfo(np.int64).max)
    return np.argmin(opposite, axis=1).astype(np.int8)


def initial_mesh(domain):
    """Coarse fan triangulation of ``domain`` around the origin.

    The origin is vertex 0. The fan uses the square points at the polar
    angles k*pi/4 below ω plus the exit point of the ray φ = ω, which gives
    2, 3, 3, 5, 6 and 7 triangles for ω = π/2, 2π/3, 3π/4, 5π/4, 3π/2, 7π/4.
    Refinement edges start on the longest edge of every triangle.
    """
    outer = domain.fan_points()
    vertices = np.vstack([np.zeros((1, 2)), outer])
    n_outer = len(outer)
    triangles = np.stack(
        [np.zeros(n_outer - 1, dtype=np.int64), np.arange(1, n_outer), np.arange(2, n_outer + 1)],
        axis=1,
    )
    refinement_edge = longest_edge(vertices, triangles)
    mesh = Mesh.from_triangles(domain, vertices, triangles, refinement_edge, level_h=1.0)
    logger.debug(
        "Initial mesh for omega=%.1f deg: %d triangles", domain.degrees, mesh.n_triangles
    )
    return mesh


def element_distances(mesh):
    """ρ_T for every triangle: the minimum over its vertices of the distance to Γ.

    Vertices flagged as boundary vertices contribute exactly 0.
    """
    vertex_distance = np.zeros(mesh.n_vertices)
    inner = mesh.interior_vertices
    vertex_distance[inner] = distance_to_boundary(mesh.domain, mesh.vertices[inner])
    return np.min(vertex_distance[mesh.triangles], axis=1)


def element_distance_to_boundary(mesh, t):
    if not 0 <= t < mesh.n_triangles:
        raise IndexError(f"Triangle index {t} out of range")
    corners = mesh.triangles[t]
    if np.any(mesh.boundary_vertex_flags[corners]):
        return 0.0
    return float(np.min(distance_to_boundary(mesh.domain, mesh.vertices[corners])))


def minimum_angle(mesh):
    """Smallest interior angle of the mesh in degrees."""
    p = mesh.vertices[mesh.triangles]
    smallest = np.pi
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cos = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        smallest = min(smallest, float(np.min(np.arccos(np.clip(cos, -1.0, 1.0)))))
    return float(np.rad2deg(smallest))


def grading_bound(h, distances, c_upper=1.0):
    """Admissible diameter c_upper * max(h^2, h * sqrt(ρ_T)) per triangle."""
    return c_upper * np.maximum(h * h, h * np.sqrt(distances))


def mesh_statistics(mesh, h=None, c_upper=1.0):
    """Quality figures of a graded mesh.

    ``c_lower`` is the measured constant with h_T >= h^2 / c_lower on the
    triangles touching Γ; ``count_constant`` is N(h) h^2 / |ln h|.
    """
    h = mesh.level_h if h is None else h
    diameters = mesh.diameters
    distances = element_distances(mesh)
    on_boundary = distances == 0.0
    stats = {
        "n_triangles": mesh.n_triangles,
        "n_vertices": mesh.n_vertices,
        "min_angle": minimum_angle(mesh),
        "violations": int(np.count_nonzero(diameters > grading_bound(h, distances, c_upper))),
        "c_lower": float(np.max(h * h / diameters[on_boundary])) if on_boundary.any() else float("nan"),
        "count_constant": (
            mesh.n_triangles * h * h / abs(np.log(h)) if h < 1.0 else float("nan")
        ),
    }
    return stats


def dump_mesh(mesh, path):
    """Write the mesh as text records: ``v x y``, ``t i j k r``, ``b i j`` (0-based)."""
    with open(path, "w", encoding="utf-8") as stream:
        for x, y in mesh.vertices:
            stream.write(f"v {float(x)!r} {float(y)!r}\n")
        for (i, j, k), r in zip(mesh.triangles, mesh.refinement_edge):
            stream.write(f"t {i} {j} {k} {r}\n")
        for i, j in mesh.boundary_edges:
            stream.write(f"b {i} {j}\n")
    logger.info("Mesh with %d triangles written to %s", mesh.n_triangles, path)


def load_mesh(path, domain, level_h=1.0):
    """Read a mesh written by :func:`dump_mesh`.

    The boundary is rebuilt from the triangles and checked against the
    ``b`` records.
    """
    vertices, triangles, refinement_edge, boundary = [], [], [], []
    with open(path, "r", encoding="utf-8") as stream:
        for line_number, line in enumerate(stream, start=1):
            fields = line.split()
            if not fields:
                continue
            tag = fields[0]
            if tag == "v" and len(fields) == 3:
                vertices.append([float(fields[1]), float(fields[2])])
            elif tag == "t" and len(fields) == 5:
                triangles.append([int(v) for v in fields[1:4]])
                refinement_edge.append(int(fields[4]))
            elif tag == "b" and len(fields) == 3:
                boundary.append([int(fields[1]), int(fields[2])])
            else:
                raise ValueError(f"{path}:{line_number}: malformed record {line.strip()!r}")

    mesh = Mesh.from_triangles(domain, vertices, triangles, refinement_edge, level_h=level_h)
    boundary = np.array(boundary, dtype=np.int64).reshape(-1, 2)
    table = EdgeTable(mesh.boundary_edges[:, 0], mesh.boundary_edges[:, 1], np.arange(len(mesh.boundary_edges)))
    if len(boundary) != len(mesh.boundary_edges):
        raise NonConformingMeshError(
            f"{path}: {len(boundary)} boundary records, topology gives {len(mesh.boundary_edges)}"
        )
    table.find(boundary[:, 0], boundary[:, 1])
    return mesh
