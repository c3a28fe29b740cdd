import numpy as np
import pytest

from fluxfem.control import (
    ControlProblem,
    ControlSolverError,
    ReducedOperator,
    control_errors,
    discrete_harmonic_extension,
    l2_boundary_projection,
    optimality_residuals,
    solve_control,
)
from fluxfem.fem import BoundaryFunction, DirichletSolver, SolverConvergenceError, assemble_stiffness
from fluxfem.flux import boundary_mass_matrix, boundary_moments, flux_error_l2
from fluxfem.geometry import refine_uniform
from fluxfem.manufactured import control_bench


@pytest.fixture
def small_square(square_mesh):
    return refine_uniform(square_mesh, 1)


def _reduced_matrix(operator):
    return np.column_stack([operator.apply(column) for column in np.eye(operator.size)])


def test_zeroDataGivesZeroControl(lshape_mesh):
    solution = solve_control(ControlProblem(lshape_mesh, alpha=1.0))
    assert np.all(solution.u_h.coefficients == 0.0)
    assert np.all(solution.y_h.coefficients == 0.0)
    assert np.all(solution.p_h.coefficients == 0.0)
    assert solution.krylov_stats.iterations == 0


def test_harmonicExtensionReproducesAffineData(lshape_mesh):
    g = BoundaryFunction.interpolate(lshape_mesh, lambda x, y: 3.0 * x + y - 1.0)
    extension = discrete_harmonic_extension(lshape_mesh, g)
    expected = 3.0 * lshape_mesh.vertices[:, 0] + lshape_mesh.vertices[:, 1] - 1.0
    np.testing.assert_allclose(extension.coefficients, expected, atol=1e-10)


def test_harmonicExtensionMinimisesEnergy(lshape_mesh):
    values = np.random.default_rng(11).standard_normal(len(lshape_mesh.boundary_vertices))
    g = BoundaryFunction(lshape_mesh, values)
    stiffness = assemble_stiffness(lshape_mesh)
    extension = discrete_harmonic_extension(lshape_mesh, g).coefficients
    competitor = g.extend_by_zero().coefficients
    assert extension @ stiffness @ extension <= competitor @ stiffness @ competitor
    np.testing.assert_array_equal(extension[lshape_mesh.boundary_vertices], values)


def test_projectionIsOrthogonal(lshape_mesh):
    field = lambda x, y, nx, ny: np.sin(3.0 * x) * ny + x * y
    projected = l2_boundary_projection(lshape_mesh, field)
    mass = boundary_mass_matrix(lshape_mesh)
    np.testing.assert_allclose(mass @ projected.coefficients, boundary_moments(lshape_mesh, field), atol=1e-12)


def test_reducedOperatorIsSymmetricPositive(small_square):
    operator = ReducedOperator(small_square, alpha=0.5, solver=DirichletSolver(small_square, method="direct"))
    matrix = _reduced_matrix(operator)
    np.testing.assert_allclose(matrix, matrix.T, atol=1e-12)
    eigenvalues = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    boundary_mass = operator.boundary_mass.toarray()
    # α M_Γ is a lower bound
    assert eigenvalues.min() >= 0.5 * np.linalg.eigvalsh(boundary_mass).min() - 1e-12
    assert operator.applications == operator.size


def test_reducedOperatorIsLinear(small_square):
    operator = ReducedOperator(small_square, alpha=1.0)
    rng = np.random.default_rng(5)
    u, v = rng.standard_normal((2, operator.size))
    np.testing.assert_allclose(operator.apply(2.0 * u - v), 2.0 * operator.apply(u) - operator.apply(v), atol=1e-10)
    # column vectors are accepted as well
    np.testing.assert_allclose(operator.apply(u[:, None]), operator.apply(u), atol=1e-14)


@pytest.mark.parametrize("alpha", [1.0, 0.1])
def test_benchmarkOptimalitySystem(square_mesh, alpha):
    mesh = refine_uniform(square_mesh, 2)
    problem = ControlProblem.from_benchmark(mesh, control_bench(np.pi / 2, alpha))
    solution = solve_control(problem)

    assert solution.krylov_stats.iterations > 0
    assert solution.krylov_stats.residual <= 1e-9
    residuals = optimality_residuals(solution, problem)
    assert set(residuals) == {"state", "adjoint", "optimality"}
    assert max(residuals.values()) <= 1e-9
    np.testing.assert_array_equal(solution.y_h.coefficients[mesh.boundary_vertices], solution.u_h.coefficients)
    assert np.all(solution.p_h.coefficients[mesh.boundary_vertices] == 0.0)
    # α u_h is the discrete normal derivative of the adjoint
    scale = np.abs(solution.u_h.coefficients).max()
    np.testing.assert_allclose(
        solution.adjoint_flux.coefficients, alpha * solution.u_h.coefficients, atol=1e-7 * alpha * scale
    )


def test_tamperedSolutionViolatesOptimality(square_mesh):
    mesh = refine_uniform(square_mesh, 2)
    problem = ControlProblem.from_benchmark(mesh, control_bench(np.pi / 2))
    solution = solve_control(problem)
    shifted = BoundaryFunction(mesh, solution.u_h.coefficients + 0.1)
    tampered = type(solution)(shifted, solution.y_h, solution.p_h, solution.krylov_stats)
    residuals = optimality_residuals(tampered, problem)
    assert residuals["state"] == np.inf
    assert residuals["optimality"] > 1e-3


def test_controlErrorsDecrease(square_mesh):
    bench = control_bench(np.pi / 2)
    errors = []
    for level in (2, 3):
        mesh = refine_uniform(square_mesh, level)
        solution = solve_control(ControlProblem.from_benchmark(mesh, bench))
        errors.append(control_errors(solution, bench))
    assert errors[1][0] < errors[0][0]
    assert errors[1][1] < errors[0][1]


def test_gmresFailureRaises(square_mesh):
    mesh = refine_uniform(square_mesh, 2)
    problem = ControlProblem.from_benchmark(mesh, control_bench(np.pi / 2))
    stingy = ControlProblem(mesh, problem.alpha, problem.f_state, problem.y_desired, restart=1, maxiter=1)
    with pytest.raises(ControlSolverError) as error:
        solve_control(stingy)
    assert isinstance(error.value, SolverConvergenceError)
    assert error.value.iterations >= 1
    assert error.value.history


def test_problemFromSettings(square_mesh, settings):
    problem = ControlProblem.from_benchmark(square_mesh, control_bench(np.pi / 2, 0.5), settings)
    assert problem.alpha == 0.5
    assert problem.restart == settings["control"]["gmres_restart"]
    assert problem.optimality_tol == settings["checks"]["optimality_tol"]


def test_alphaMustBePositive(square_mesh):
    with pytest.raises(ValueError):
        ControlProblem(square_mesh, alpha=-1.0)


def test_rayleighQuotientsAreBoundedBelow(square_mesh):
    mesh = refine_uniform(square_mesh, 2)
    alpha = 0.3
    operator = ReducedOperator(mesh, alpha)
    smallest = np.linalg.eigvalsh(operator.boundary_mass.toarray()).min()
    rng = np.random.default_rng(17)
    for u in rng.standard_normal((20, operator.size)):
        assert u @ operator.apply(u) / (u @ u) > alpha * smallest > 0.0


def test_reducedOperatorIsSymmetric(square_mesh):
    mesh = refine_uniform(square_mesh, 2)
    operator = ReducedOperator(mesh, 1.0)
    rng = np.random.default_rng(23)
    u, v = rng.standard_normal((2, operator.size))
    defect = abs(operator.apply(u) @ v - u @ operator.apply(v))
    assert defect <= 1e-9 * np.linalg.norm(u) * np.linalg.norm(v)


def test_doublingTheDataDoublesTheSolution(square_mesh):
    mesh = refine_uniform(square_mesh, 2)
    bench = control_bench(np.pi / 2)
    single = solve_control(ControlProblem(mesh, 1.0, bench.f_state, bench.y_desired))
    double = solve_control(
        ControlProblem(
            mesh,
            1.0,
            lambda x, y: 2.0 * bench.f_state(x, y),
            lambda x, y: 2.0 * bench.y_desired(x, y),
        )
    )
    for first, second in (
        (single.u_h.coefficients, double.u_h.coefficients),
        (single.y_h.coefficients, double.y_h.coefficients),
        (single.p_h.coefficients, double.p_h.coefficients),
    ):
        np.testing.assert_allclose(second, 2.0 * first, atol=1e-8 * np.abs(first).max())


def test_errorsOfZeroSolution(square_mesh):
    mesh = refine_uniform(square_mesh, 2)
    bench = control_bench(np.pi / 2)
    solution = solve_control(ControlProblem(mesh, 1.0))
    err_u, err_y = control_errors(solution, bench)
    assert err_u == pytest.approx(flux_error_l2(mesh, lambda x, y, nx, ny: np.zeros_like(x), bench.u_exact))
    assert err_y > 0.0


def test_projectedControlIsTheBestTrace(square_mesh):
    mesh = refine_uniform(square_mesh, 2)
    bench = control_bench(np.pi / 2)
    solution = solve_control(ControlProblem.from_benchmark(mesh, bench))
    projected = l2_boundary_projection(mesh, bench.u_exact)
    best = type(solution)(projected, solution.y_h, solution.p_h, solution.krylov_stats)
    assert control_errors(best, bench)[0] < control_errors(solution, bench)[0]
