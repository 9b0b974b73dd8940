"""
Rendering experiment results as CSV, JSON or a text table.

CSV leaves out timing so reruns with the same seed are byte-identical.
"""

import csv
import io
import json
import logging
from typing import List, Optional

from fraisse.constants import FORMAT_CSV, FORMAT_JSON, FORMAT_TABLE, OUTPUT_FORMATS, RESULT_SCHEMA_VERSION
from fraisse.harness.runner import ExperimentResult, ResultRow

logger = logging.getLogger(__name__)

COLUMNS = [
    "size_index",
    "sizes",
    "sentence",
    "trials",
    "successes",
    "estimate",
    "ci_low",
    "ci_high",
    "failure_bound",
]


def _sizes(sizes) -> str:
    return "x".join(str(n) for n in sizes)


def _bound(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6e}"


def _cells(row: ResultRow) -> List[str]:
    return [
        str(row.size_index),
        _sizes(row.sizes),
        row.sentence,
        str(row.trials),
        str(row.successes),
        f"{row.estimate:.6f}",
        f"{row.ci_low:.6f}",
        f"{row.ci_high:.6f}",
        _bound(row.failure_bound),
    ]


def to_csv(result: ExperimentResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(COLUMNS)
    for row in result.rows:
        writer.writerow(_cells(row))
    return buffer.getvalue()


def to_json(result: ExperimentResult) -> str:
    rows = []
    for row in result.rows:
        entry = {
            "size_index": row.size_index,
            "sizes": list(row.sizes),
            "sentence": row.sentence,
            "trials": row.trials,
            "successes": row.successes,
            "estimate": row.estimate,
            "ci_low": row.ci_low,
            "ci_high": row.ci_high,
            "failure_bound": row.failure_bound,
        }
        if result.include_timing:
            entry["wall_time"] = row.wall_time
        rows.append(entry)
    document = {
        "schema": RESULT_SCHEMA_VERSION,
        "metadata": {
            "name": result.name,
            "class": result.class_name,
            "measure": result.measure,
            "seed": result.seed,
            "config_hash": result.config_hash,
            "version": result.version,
        },
        "rows": rows,
    }
    return json.dumps(document, indent=2) + "\n"


def to_table(result: ExperimentResult) -> str:
    lines = [[c for c in COLUMNS]] + [_cells(row) for row in result.rows]
    widths = [max(len(line[i]) for line in lines) for i in range(len(COLUMNS))]
    rendered = ["  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip() for line in lines]
    rendered.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(rendered) + "\n"


def summarize(result: ExperimentResult, format: str = FORMAT_CSV) -> str:
    """Render ``result``; columns always come in COLUMNS order."""
    if format == FORMAT_CSV:
        return to_csv(result)
    if format == FORMAT_JSON:
        return to_json(result)
    if format == FORMAT_TABLE:
        return to_table(result)
    raise ValueError(f"Unknown format {format!r}; expected one of {OUTPUT_FORMATS}")


def write_result(result: ExperimentResult, path: str, format: str = FORMAT_CSV):
    # newline="" keeps the CSV line terminators as written
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(summarize(result, format))
    logger.info(f"Wrote {len(result.rows)} result rows to {path}")
