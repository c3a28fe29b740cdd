# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
"""CSV and markdown serialisation of :class:`~fluxfem.study.ExperimentReport`.

CSV files start with ``# key: value`` metadata lines followed by a header
row; empty cells stand for missing values (failed levels, the first EOC).
"""
import csv
import io
import logging
from pathlib import Path

from .study import ExperimentReport, LevelRecord

logger = logging.getLogger(__name__)

REPORT_FORMATS = ("csv", "markdown")
_METADATA_PREFIX = "# "


def _cell(value):
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def _parse_cell(text):
    if text == "":
        return None
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def format_csv(report):
    stream = io.StringIO()
    for key, value in report.metadata.items():
        stream.write(f"{_METADATA_PREFIX}{key}: {_cell(value)}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(report.header)
    for row in report.rows():
        writer.writerow([_cell(value) for value in row])
    return stream.getvalue()


def _error_with_rate(error, rate):
    if error is None:
        return ""
    if rate is None:
        return f"{error:.2e}"
    return f"{error:.2e} ({rate:.2f})"


def format_markdown(report):
    """Table in the ``error (EOC)`` layout, closed by an ``Expected:`` line."""
    metadata = report.metadata
    shown = [name for name in report.columns if not name.startswith("eoc_")]
    titles = ["level", "h"]
    for name in shown:
        rated = name.startswith("err_") and "eoc_" + name[len("err_"):] in report.columns
        titles.append(f"{name} (EOC)" if rated else name)

    lines = []
    if metadata:
        lines.append(
            f"{report.experiment} study, omega = {metadata.get('omega_degrees')} deg, "
            f"grading = {metadata.get('grading')}"
        )
        lines.append("")
    lines.append("| " + " | ".join(titles) + " |")
    lines.append("|" + "|".join("---" for _ in titles) + "|")
    for record in report.records:
        cells = [str(record.level), f"{record.h:.3e}"]
        if record.failed:
            cells += [record.status] + [""] * (len(shown) - 1)
        else:
            for name in shown:
                value = record.values.get(name)
                if name.startswith("err_"):
                    cells.append(_error_with_rate(value, record.values.get("eoc_" + name[len("err_"):])))
                elif isinstance(value, float):
                    cells.append(f"{value:.3e}")
                else:
                    cells.append(_cell(value))
        lines.append("| " + " | ".join(cells) + " |")
    if "expected_rate" in metadata:
        lines.append("")
        lines.append(f"Expected: ({metadata['expected_rate']:.2f})")
    return "\n".join(lines) + "\n"


def _infer_format(path):
    return "markdown" if Path(path).suffix.lower() in (".md", ".markdown") else "csv"


def emit_report(report, path, fmt=None):
    """Write ``report`` to ``path`` as ``csv`` or ``markdown`` (default from the suffix).

    :raises OSError: if the file cannot be written
    """
    fmt = _infer_format(path) if fmt is None else fmt
    if fmt not in REPORT_FORMATS:
        raise ValueError(f"Unknown report format {fmt!r}, expected one of {REPORT_FORMATS}")
    text = format_csv(report) if fmt == "csv" else format_markdown(report)
    with open(path, "w", encoding="utf-8", newline="") as stream:
        stream.write(text)
    logger.info("Report with %d level(s) written to %s", len(report.records), path)
    return Path(path)


def parse_report(path):
    """Read a CSV written by :func:`emit_report`."""
    with open(path, "r", encoding="utf-8", newline="") as stream:
        lines = stream.read().splitlines()
    metadata = {}
    body = 0
    while body < len(lines) and lines[body].startswith(_METADATA_PREFIX):
        key, _, value = lines[body][len(_METADATA_PREFIX):].partition(": ")
        metadata[key] = _parse_cell(value)
        body += 1
    rows = list(csv.reader(lines[body:]))
    if not rows:
        raise ValueError(f"{path}: missing header row")
    header = rows[0]
    if header[:2] != ["level", "h"] or header[-1] != "status":
        raise ValueError(f"{path}: unexpected header {header}")
    columns = tuple(header[2:-1])

    report = ExperimentReport(metadata.get("experiment", ""), columns, metadata=metadata)
    for row in rows[1:]:
        cells = [_parse_cell(text) for text in row]
        values = {name: value for name, value in zip(columns, cells[2:-1]) if value is not None}
        report.records.append(LevelRecord(int(cells[0]), float(cells[1]), values, status=row[-1]))
    return report
