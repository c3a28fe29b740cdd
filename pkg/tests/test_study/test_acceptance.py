"""Full convergence reproductions on fine levels.

Deselected by default; run with ``pytest -m acceptance``.
"""
import pytest

from fluxfem.constants import EXPERIMENT_COMPARE, EXPERIMENT_CONTROL
from fluxfem.study import ExperimentConfig, run_control_study, run_flux_study, run_grading_comparison

pytestmark = pytest.mark.acceptance


def _final_rate(report, column):
    assert not report.failed, [record.status for record in report.records]
    return report.column(column)[-1]


@pytest.mark.parametrize(
    "omega_degrees, low, high",
    [
        (90.0, 1.85, 2.10),
        (120.0, 1.80, 2.05),
        (135.0, 1.75, 1.95),
        (270.0, 0.28, 0.38),
        (315.0, 0.10, 0.18),
    ],
)
def test_fluxRates(omega_degrees, low, high, settings):
    report = run_flux_study(ExperimentConfig(omega_degrees=omega_degrees, levels=(4, 7), settings=settings))
    classical = _final_rate(report, "eoc_classical")
    assert low <= classical <= high
    # same rate class for the variational flux
    assert abs(_final_rate(report, "eoc_variational") - classical) < 0.25


@pytest.mark.parametrize(
    "omega_degrees, bands",
    [
        (120.0, {"eoc_u": (1.85, 2.10), "eoc_y": (1.9, 2.3)}),
        (270.0, {"eoc_u": (0.25, 0.40), "eoc_y": (0.58, 0.72)}),
    ],
)
def test_controlRates(omega_degrees, bands, settings):
    config = ExperimentConfig(
        experiment=EXPERIMENT_CONTROL, omega_degrees=omega_degrees, levels=(3, 6), alpha=1.0, settings=settings
    )
    report = run_control_study(config)
    for column, (low, high) in bands.items():
        assert low <= _final_rate(report, column) <= high, column


def test_gradedMeshesWinAtFinestLevel(settings):
    config = ExperimentConfig(experiment=EXPERIMENT_COMPARE, omega_degrees=90.0, levels=(3, 6), settings=settings)
    report = run_grading_comparison(config)
    assert not report.failed
    finest = report.records[-1].values
    assert finest["graded_smaller"] == "yes"
    assert finest["err_u_graded"] < finest["err_u_uniform"]
