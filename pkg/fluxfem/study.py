# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
"""Convergence studies over a range of mesh levels.

Level ``N`` uses the nominal mesh size ``h = 2^-N``. Every level is built
from the coarse mesh on its own, so levels are independent and can run in
separate processes.
"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .constants import (
    EXPERIMENT_COMPARE,
    EXPERIMENT_CONTROL,
    EXPERIMENT_FLUX,
    EXPERIMENTS,
    GRADING_BOUNDARY_CONCENTRATED,
    GRADING_MODES,
    GRADING_QUASI_UNIFORM,
)
from .control import ControlProblem, control_errors, solve_control
from .fem.assembly import assemble_load, dump_matrix
from .fem.quadrature import QuadratureScheme
from .fem.solvers import DirichletSolver
from .flux import ConsistencyError, classical_flux, compatibility_residual, flux_error_l2, variational_flux
from .geometry.mesh import dump_mesh, initial_mesh, mesh_statistics
from .geometry.refinement import GradingPolicy, refine_graded
from .geometry.sector import SectorDomain
from .manufactured import ControlBenchmark, FluxBenchmark
from .settings import load_settings

logger = logging.getLogger(__name__)

FLUX_COLUMNS = (
    "n_elem",
    "n_dof",
    "err_classical",
    "eoc_classical",
    "err_variational",
    "eoc_variational",
    "cg_iters",
)
CONTROL_COLUMNS = (
    "n_elem",
    "n_dof_total",
    "n_dof_boundary",
    "err_u",
    "eoc_u",
    "err_y",
    "eoc_y",
    "gmres_iters",
    "cg_iters",
)
COMPARISON_COLUMNS = (
    "n_elem_graded",
    "n_elem_uniform",
    "err_u_graded",
    "eoc_u_graded",
    "err_u_uniform",
    "eoc_u_uniform",
    "err_y_graded",
    "err_y_uniform",
    "graded_smaller",
)

STATUS_OK = "ok"


def eoc(errors):
    """log2(e_{i-1} / e_i) for consecutive levels; ``None`` where undefined."""
    rates = [None]
    for previous, current in zip(errors[:-1], errors[1:]):
        if previous is None or current is None or previous <= 0.0 or current <= 0.0:
            rates.append(None)
        else:
            rates.append(math.log2(previous / current))
    return rates[: len(errors)]


@dataclass
class LevelRecord:
    level: int
    h: float
    values: Dict[str, Any] = field(default_factory=dict)
    status: str = STATUS_OK
    seconds: float = field(default=0.0, compare=False)

    @property
    def failed(self):
        return self.status != STATUS_OK


@dataclass
class ExperimentReport:
    """Per-level rows of a study plus its metadata.

    ``columns`` are the data columns between ``level, h`` and ``status``;
    every ``eoc_<name>`` column is derived from ``err_<name>``.
    """

    experiment: str
    columns: Tuple[str, ...]
    metadata: Dict[str, Any] = field(default_factory=dict)
    records: List[LevelRecord] = field(default_factory=list)

    @property
    def header(self):
        return ("level", "h") + tuple(self.columns) + ("status",)

    @property
    def failed(self):
        return any(record.failed for record in self.records)

    def column(self, name):
        return [record.values.get(name) for record in self.records]

    def compute_eocs(self):
        for name in self.columns:
            if not name.startswith("eoc_"):
                continue
            rates = eoc(self.column("err_" + name[len("eoc_"):]))
            for record, rate in zip(self.records, rates):
                record.values[name] = rate
        return self

    def rows(self):
        for record in self.records:
            yield [record.level, record.h] + [record.values.get(c) for c in self.columns] + [record.status]


@dataclass
class ExperimentConfig:
    experiment: str = EXPERIMENT_FLUX
    omega_degrees: float = 90.0
    levels: Tuple[int, int] = (3, 5)
    grading: str = GRADING_BOUNDARY_CONCENTRATED
    alpha: Optional[float] = None
    output: Optional[str] = None
    dump_mesh: Optional[str] = None
    dump_matrix: Optional[str] = None
    parallel_levels: Optional[bool] = None
    settings: Dict[str, Any] = field(default_factory=load_settings)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"Unknown experiment {self.experiment!r}, expected one of {EXPERIMENTS}")
        if self.grading not in GRADING_MODES:
            raise ValueError(f"Unknown grading {self.grading!r}, expected one of {GRADING_MODES}")
        SectorDomain.from_degrees(self.omega_degrees)  # raises DomainError outside [90, 360)
        first, last = self.levels
        if first < 0 or last < first:
            raise ValueError(f"Level range {first}..{last} is empty")
        max_level = self.settings["mesh"]["max_level"]
        if last > max_level:
            raise ValueError(f"Level {last} exceeds the configured maximum mesh.max_level={max_level}")
        if self.alpha is None:
            self.alpha = self.settings["control"]["alpha"]
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.parallel_levels is None:
            self.parallel_levels = self.settings["study"]["parallel_levels"]

    @property
    def level_numbers(self):
        return list(range(self.levels[0], self.levels[1] + 1))

    @property
    def domain(self):
        return SectorDomain.from_degrees(self.omega_degrees)

    def metadata(self):
        domain = self.domain
        metadata = {
            "experiment": self.experiment,
            "omega_degrees": float(self.omega_degrees),
            "lambda_bar": float(domain.lambda_bar),
            "grading": self.grading,
            "solver_method": self.settings["solver"]["method"],
        }
        if self.experiment == EXPERIMENT_FLUX:
            metadata["expected_rate"] = FluxBenchmark(domain).expected_rate
        else:
            metadata["alpha"] = float(self.alpha)
            metadata["expected_rate"] = ControlBenchmark(domain, self.alpha).expected_rate
        return metadata


def parse_levels(text):
    """``"a..b"`` or ``"a"`` to a ``(first, last)`` tuple."""
    first, sep, last = text.partition("..")
    try:
        levels = (int(first), int(last) if sep else int(first))
    except ValueError:
        raise ValueError(f"Levels must look like 'a..b', got {text!r}") from None
    return levels


def build_level_mesh(domain, grading, h, mesh_settings):
    policy = GradingPolicy.from_settings(grading, h, mesh_settings)
    return refine_graded(initial_mesh(domain), policy)


def _level_path(path, level, many):
    if path is None or not many:
        return path
    path = Path(path)
    return str(path.with_name(f"{path.stem}_level{level}{path.suffix}"))


def _dump_level(config, level, mesh, solver):
    many = len(config.level_numbers) > 1
    if config.dump_mesh:
        dump_mesh(mesh, _level_path(config.dump_mesh, level, many))
    if config.dump_matrix:
        # interior block of the stiffness matrix after Dirichlet elimination
        system = solver.system(np.zeros(mesh.n_vertices), np.zeros(len(mesh.boundary_vertices)))
        dump_matrix(system.matrix, _level_path(config.dump_matrix, level, many))


def flux_level(config, level):
    """Both flux approximations and their L²(Γ) errors on one level."""
    settings = config.settings
    h = 2.0**-level
    domain = config.domain
    bench = FluxBenchmark(domain)
    mesh = build_level_mesh(domain, config.grading, h, settings["mesh"])
    scheme = QuadratureScheme.from_settings(settings["quadrature"])
    solver = DirichletSolver.from_settings(mesh, settings["solver"])

    load = assemble_load(mesh, bench.f_rhs, scheme.standard, scheme.corner)
    u_h = solver.solve(load, None)
    classical = classical_flux(mesh, u_h)
    variational = variational_flux(
        mesh, u_h, bench.f_rhs, stiffness=solver.stiffness, load=load, tol=settings["checks"]["interior_residual_tol"]
    )
    defect = compatibility_residual(mesh, variational, load)
    if defect > settings["checks"]["compatibility_tol"]:
        raise ConsistencyError(f"Flux compatibility violated by {defect:.3e} at level {level}")
    _dump_level(config, level, mesh, solver)

    errors = dict(edge_points=scheme.edge_points, corner_edge_points=scheme.corner_edge_points)
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug("Level %d mesh statistics: %s", level, mesh_statistics(mesh, h, settings["mesh"]["c_upper"]))
    return {
        "n_elem": mesh.n_triangles,
        "n_dof": mesh.n_vertices,
        "err_classical": flux_error_l2(mesh, classical, bench.flux_exact, **errors),
        "err_variational": flux_error_l2(mesh, variational, bench.flux_exact, **errors),
        "cg_iters": solver.cg_iterations,
    }


def control_level(config, level):
    """Discrete optimal control and its errors on one level."""
    settings = config.settings
    h = 2.0**-level
    domain = config.domain
    bench = ControlBenchmark(domain, config.alpha)
    mesh = build_level_mesh(domain, config.grading, h, settings["mesh"])
    scheme = QuadratureScheme.from_settings(settings["quadrature"])
    solver = DirichletSolver.from_settings(mesh, settings["solver"])

    problem = ControlProblem.from_benchmark(mesh, bench, settings, scheme.standard, scheme.corner)
    solution = solve_control(problem, solver)
    _dump_level(config, level, mesh, solver)
    err_u, err_y = control_errors(
        solution, bench, scheme.standard, scheme.corner, scheme.edge_points, scheme.corner_edge_points
    )
    return {
        "n_elem": mesh.n_triangles,
        "n_dof_total": mesh.n_vertices,
        "n_dof_boundary": len(mesh.boundary_vertices),
        "err_u": err_u,
        "err_y": err_y,
        "gmres_iters": solution.krylov_stats.iterations,
        "cg_iters": solver.cg_iterations,
    }


_LEVEL_RUNNERS = {EXPERIMENT_FLUX: flux_level, EXPERIMENT_CONTROL: control_level}


def run_level(config, level):
    """One row of a study; failures become a failure row instead of an exception."""
    h = 2.0**-level
    logger.info("Level %d (h=%g) of %s study on omega=%g deg", level, h, config.experiment, config.omega_degrees)
    start = time.perf_counter()
    try:
        values = _LEVEL_RUNNERS[config.experiment](config, level)
    except (ArithmeticError, ValueError, RuntimeError) as error:
        logger.error("Level %d failed: %s: %s", level, type(error).__name__, error)
        status = f"failed: {type(error).__name__}: {error}".replace("\n", " ")
        return LevelRecord(level, h, status=status, seconds=time.perf_counter() - start)
    seconds = time.perf_counter() - start
    logger.info("Level %d finished in %.1f s", level, seconds)
    return LevelRecord(level, h, values, seconds=seconds)


def _run_levels(config):
    levels = config.level_numbers
    if config.parallel_levels and len(levels) > 1:
        with ProcessPoolExecutor() as executor:
            return list(executor.map(run_level, [config] * len(levels), levels))
    return [run_level(config, level) for level in levels]


def _started():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _record_timing(report, started):
    # wall-clock figures stay in the metadata so the rows are reproducible
    report.metadata["started"] = started
    report.metadata["elapsed_seconds"] = round(sum(record.seconds for record in report.records), 3)
    return report


def _run_study(config, experiment, columns):
    if config.experiment != experiment:
        config = replace(config, experiment=experiment)
    started = _started()
    report = ExperimentReport(experiment, columns, metadata=config.metadata())
    report.records = _run_levels(config)
    _record_timing(report, started)
    return report.compute_eocs()


def run_flux_study(config):
    return _run_study(config, EXPERIMENT_FLUX, FLUX_COLUMNS)


def run_control_study(config):
    return _run_study(config, EXPERIMENT_CONTROL, CONTROL_COLUMNS)


def run_grading_comparison(config):
    """Control study on boundary-concentrated and on quasi-uniform meshes, level by level."""
    control = replace(config, experiment=EXPERIMENT_CONTROL)
    graded = run_control_study(replace(control, grading=GRADING_BOUNDARY_CONCENTRATED))
    uniform = run_control_study(replace(control, grading=GRADING_QUASI_UNIFORM))

    metadata = control.metadata()
    metadata.update(experiment=EXPERIMENT_COMPARE, grading="both")
    report = ExperimentReport(EXPERIMENT_COMPARE, COMPARISON_COLUMNS, metadata=metadata)
    started = graded.metadata["started"]
    for first, second in zip(graded.records, uniform.records):
        if first.failed or second.failed:
            status = first.status if first.failed else second.status
            report.records.append(
                LevelRecord(first.level, first.h, status=status, seconds=first.seconds + second.seconds)
            )
            continue
        err_graded, err_uniform = first.values["err_u"], second.values["err_u"]
        report.records.append(
            LevelRecord(
                first.level,
                first.h,
                {
                    "n_elem_graded": first.values["n_elem"],
                    "n_elem_uniform": second.values["n_elem"],
                    "err_u_graded": err_graded,
                    "err_u_uniform": err_uniform,
                    "err_y_graded": first.values["err_y"],
                    "err_y_uniform": second.values["err_y"],
                    "graded_smaller": "yes" if err_graded < err_uniform else "no",
                },
                seconds=first.seconds + second.seconds,
            )
        )
    _record_timing(report, started)
    return report.compute_eocs()


STUDIES = {
    EXPERIMENT_FLUX: run_flux_study,
    EXPERIMENT_CONTROL: run_control_study,
    EXPERIMENT_COMPARE: run_grading_comparison,
}
