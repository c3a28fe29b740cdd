import numpy as np
import pytest

from fluxfem.constants import GRADING_QUASI_UNIFORM
from fluxfem.geometry import (
    GradingError,
    GradingPolicy,
    SectorDomain,
    bisect,
    global_sweep_count,
    grading_violations,
    initial_mesh,
    mesh_statistics,
    minimum_angle,
    refine_graded,
    refine_uniform,
)


def _is_conforming(mesh):
    _, counts = mesh.interior_edge_counts()
    return counts.max() <= 2 and np.count_nonzero(counts == 1) == len(mesh.boundary_edges)


def test_bisectSingleTriangleOfSquare(square_mesh):
    refined = bisect(square_mesh, [0])
    # the diagonal is shared, so both triangles are split
    assert refined.n_triangles == 4
    assert refined.n_vertices == 5
    np.testing.assert_array_equal(refined.vertices[4], [0.5, 0.5])
    # the new vertex is local vertex 0 of every child and its refinement edge is opposite
    children = np.flatnonzero(np.any(refined.triangles == 4, axis=1))
    assert len(children) == 4
    np.testing.assert_array_equal(refined.triangles[children, 0], 4)
    np.testing.assert_array_equal(refined.refinement_edge[children], 0)
    assert refined.area == pytest.approx(1.0, abs=1e-15)


def test_bisectWithoutMarksReturnsSameMesh(square_mesh):
    assert bisect(square_mesh, []) is square_mesh
    assert bisect(square_mesh, np.zeros(2, dtype=bool)) is square_mesh


def test_bisectRejectsBadMarks(square_mesh):
    with pytest.raises(IndexError):
        bisect(square_mesh, [2])
    with pytest.raises(IndexError):
        bisect(square_mesh, np.ones(3, dtype=bool))


@pytest.mark.parametrize("sweeps", [1, 2, 3, 4, 5])
def test_globalSweepsDoubleTheCount(square_mesh, sweeps):
    mesh = square_mesh
    for _ in range(sweeps):
        mesh = bisect(mesh, np.ones(mesh.n_triangles, dtype=bool))
    assert mesh.n_triangles == 2 * 2**sweeps
    assert _is_conforming(mesh)


def test_unmarkedTrianglesKeepVertexOrder(lshape_mesh):
    # marking one triangle next to the outer boundary leaves most of the mesh alone
    far = int(np.argmax(np.linalg.norm(lshape_mesh.vertices[lshape_mesh.triangles].mean(axis=1), axis=1)))
    refined = bisect(lshape_mesh, [far])
    old = {tuple(t) for t in lshape_mesh.triangles.tolist()}
    new = {tuple(t) for t in refined.triangles.tolist()}
    kept = old & new
    assert len(kept) >= lshape_mesh.n_triangles - 8
    assert refined.n_triangles > lshape_mesh.n_triangles


def test_refineUniformHalvesLevel(lshape_mesh):
    assert lshape_mesh.level_h == 0.25
    assert lshape_mesh.n_triangles == 6 * 16
    assert _is_conforming(lshape_mesh)


@pytest.mark.parametrize("omega", [np.pi / 2, 3 * np.pi / 4, 3 * np.pi / 2, 7 * np.pi / 4])
def test_minimumAngleIsBounded(omega):
    coarse = initial_mesh(SectorDomain(omega))
    fine = refine_graded(coarse, GradingPolicy(h_target=2.0**-3))
    assert minimum_angle(fine) >= 0.5 * minimum_angle(coarse) - 1e-9


def test_globalSweepCount():
    assert global_sweep_count(1.0, 1.0) == 0
    assert global_sweep_count(1.0, 0.5) == 1
    assert global_sweep_count(1.0, 2.0**-4) == 4
    assert global_sweep_count(1.0, 0.3) == 2
    with pytest.raises(ValueError):
        global_sweep_count(0.25, 0.5)


def test_quasiUniformIsPlainRefinement(square_mesh):
    policy = GradingPolicy(mode=GRADING_QUASI_UNIFORM, h_target=2.0**-3)
    graded = refine_graded(square_mesh, policy)
    uniform = refine_uniform(square_mesh, 3)
    np.testing.assert_array_equal(graded.triangles, uniform.triangles)
    np.testing.assert_array_equal(graded.vertices, uniform.vertices)
    assert graded.level_h == 2.0**-3


def test_gradedMeshHasNoViolations(graded_mesh):
    assert not grading_violations(graded_mesh, 2.0**-2).any()
    assert _is_conforming(graded_mesh)
    assert graded_mesh.area == pytest.approx(graded_mesh.domain.area, abs=1e-12)


def test_gradedMeshIsFinerThanUniform(square_mesh):
    graded = refine_graded(square_mesh, GradingPolicy(h_target=2.0**-3))
    uniform = refine_uniform(square_mesh, 3)
    assert graded.n_triangles > uniform.n_triangles
    # boundary triangles are of size h^2 up to a constant
    assert mesh_statistics(graded)["c_lower"] < 8.0


def test_elementCountGrowsLikeLogOverHSquared():
    domain = SectorDomain(3 * np.pi / 2)
    constants = []
    for level in (2, 3, 4):
        mesh = refine_graded(initial_mesh(domain), GradingPolicy(h_target=2.0**-level))
        constants.append(mesh_statistics(mesh)["count_constant"])
    assert max(constants) <= 4.0 * min(constants)


def test_gradingErrorOnSweepLimit(square_mesh):
    with pytest.raises(GradingError):
        refine_graded(square_mesh, GradingPolicy(h_target=2.0**-3, max_sweeps=1))


def test_gradingErrorOnTriangleLimit(square_mesh):
    with pytest.raises(GradingError):
        refine_graded(square_mesh, GradingPolicy(h_target=2.0**-4, max_triangles=600))


@pytest.mark.parametrize("h_target", [0.0, 1.5])
def test_policyRejectsTarget(h_target):
    with pytest.raises(ValueError):
        GradingPolicy(h_target=h_target)


def test_policyRejectsMode():
    with pytest.raises(ValueError):
        GradingPolicy(mode="adaptive")


def test_policyFromSettings(settings):
    policy = GradingPolicy.from_settings(GRADING_QUASI_UNIFORM, 0.125, settings["mesh"])
    assert policy.mode == GRADING_QUASI_UNIFORM
    assert policy.h_target == 0.125
    assert policy.max_sweeps == settings["mesh"]["max_grading_sweeps"]


# measured triangle counts of boundary-concentrated meshes graded to h = 2^-7
FINEST_GRADED_COUNTS = {90.0: 3_340_000, 270.0: 7_060_000}


def test_defaultTriangleLimitAdmitsFinestLevel(settings):
    assert GradingPolicy().max_triangles == settings["mesh"]["max_triangles"]
    assert settings["mesh"]["max_level"] >= 7
    for count in FINEST_GRADED_COUNTS.values():
        assert 2 * count <= GradingPolicy().max_triangles
