# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
"""Command line entry point.

Examples::

    fluxfem flux --omega-degrees 90 --levels 4..7 --output flux90.csv
    fluxfem control --omega-degrees 120 --levels 3..6 --alpha 1 --output control120.md
    fluxfem compare --omega-degrees 90 --levels 3..6 --output compare90.csv

Level N grades the mesh towards h = 2^-N. A count of N global bisection
sweeps halves the mesh size every second sweep (h = 2^(-N/2)), so N sweeps
correspond to level N/2.

Exit status is 0 when every level succeeded and 2 when at least one level
failed (its row is still written). A report that cannot be written exits
with 1. Invalid arguments or settings exit with 64 before any level runs.
"""
import argparse
import logging
import sys

from .constants import EXPERIMENT_CONTROL, EXPERIMENT_COMPARE, EXPERIMENT_FLUX, GRADING_BOUNDARY_CONCENTRATED, GRADING_MODES
from .report import REPORT_FORMATS, emit_report
from .settings import SettingsError, load_settings
from .study import STUDIES, ExperimentConfig, parse_levels

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_WRITE_FAILURE = 1
EXIT_PARTIAL_FAILURE = 2
EXIT_USAGE = 64

EXIT_CODES_EPILOG = f"""\
exit status:
  {EXIT_OK}   every level succeeded
  {EXIT_WRITE_FAILURE}   the report could not be written
  {EXIT_PARTIAL_FAILURE}   at least one level failed (its row is still written)
  {EXIT_USAGE}  invalid arguments or settings, nothing was run
"""

LEVELS_EPILOG = """\
level N grades the mesh towards h = 2^-N. N global bisection sweeps give
h = 2^(-N/2), so a sweep count N corresponds to level N/2.
"""


class StudyArgumentParser(argparse.ArgumentParser):
    """Reports usage errors with :data:`EXIT_USAGE` instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _levels(text):
    try:
        return parse_levels(text)
    except ValueError as error:
        raise argparse.ArgumentTypeError(str(error)) from None


def _add_study_arguments(parser, with_alpha):
    parser.add_argument("--omega-degrees", type=float, required=True, help="opening angle of the sector")
    parser.add_argument(
        "--levels",
        type=_levels,
        required=True,
        help="level range a..b; level N has h = 2^-N (N bisection sweeps give level N/2)",
    )
    parser.add_argument("--grading", choices=GRADING_MODES, default=GRADING_BOUNDARY_CONCENTRATED)
    parser.add_argument("--output", required=True, help="report file (.csv or .md)")
    parser.add_argument("--format", choices=REPORT_FORMATS, default=None, help="override the format implied by --output")
    parser.add_argument("--dump-mesh", metavar="PATH", help="write the mesh of every level")
    parser.add_argument("--dump-matrix", metavar="PATH", help="write the reduced stiffness matrix of every level")
    parser.add_argument("--parallel-levels", action="store_true", default=None, help="run levels in separate processes")
    if with_alpha:
        parser.add_argument("--alpha", type=float, default=None, help="control regularisation weight")


def build_parser():
    parser = StudyArgumentParser(
        prog="fluxfem",
        description="Convergence studies for boundary flux approximation and Dirichlet boundary control.",
        epilog=LEVELS_EPILOG + "\n" + EXIT_CODES_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    parser.add_argument("--config", metavar="YAML", help="settings file merged over the defaults")
    subparsers = parser.add_subparsers(dest="experiment", required=True)
    subcommands = (
        (EXPERIMENT_FLUX, "flux approximation study", False),
        (EXPERIMENT_CONTROL, "boundary control study", True),
        (EXPERIMENT_COMPARE, "control study on graded vs quasi-uniform meshes", True),
    )
    for name, summary, with_alpha in subcommands:
        subparser = subparsers.add_parser(
            name,
            help=summary,
            description=summary,
            epilog=LEVELS_EPILOG + "\n" + EXIT_CODES_EPILOG,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        _add_study_arguments(subparser, with_alpha)
    return parser


def _configure_logging(verbosity):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    try:
        settings = load_settings(args.config)
        config = ExperimentConfig(
            experiment=args.experiment,
            omega_degrees=args.omega_degrees,
            levels=args.levels,
            grading=args.grading,
            alpha=getattr(args, "alpha", None),
            output=args.output,
            dump_mesh=args.dump_mesh,
            dump_matrix=args.dump_matrix,
            parallel_levels=args.parallel_levels,
            settings=settings,
        )
    except (SettingsError, ValueError, OSError) as error:
        parser.error(str(error))

    report = STUDIES[config.experiment](config)
    try:
        emit_report(report, config.output, args.format)
    except OSError as error:
        logger.error("Cannot write report: %s", error)
        return EXIT_WRITE_FAILURE
    if report.failed:
        failed = [record.level for record in report.records if record.failed]
        logger.warning("Level(s) %s failed; see the status column of %s", failed, config.output)
        return EXIT_PARTIAL_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
