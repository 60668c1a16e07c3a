"""
CSV and structured-text report writers.

CSV bodies are comma separated with a header row, LF line endings and floats
written with 17 significant digits.  Structured-text preambles are emitted as
'# key: value' lines above the header; in deterministic mode they carry no
timestamps, so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .logger_config import logger


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return ";".join(format_value(v) for v in value)
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def preamble_text(fields: Mapping[str, Any], deterministic: bool = True) -> str:
    lines = []
    if not deterministic:
        lines.append(f"# generated_at: {datetime.now(timezone.utc).isoformat()}")
    for key, value in fields.items():
        lines.append(f"# {key}: {format_value(value)}")
    return "".join(line + "\n" for line in lines)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]],
              preamble: Mapping[str, Any] | None = None, deterministic: bool = True) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = csv_text(header, rows)
    if preamble:
        text = preamble_text(preamble, deterministic) + text
    path.write_text(text, newline="\n")
    logger.info(f"Wrote report {path}")
    return path


def write_summary(path: str | Path, fields: Mapping[str, Any], deterministic: bool = True) -> Path:
    """Structured text summary: one 'key: value' line per field."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [] if deterministic else [f"generated_at: {datetime.now(timezone.utc).isoformat()}"]
    lines += [f"{key}: {format_value(value)}" for key, value in fields.items()]
    path.write_text("".join(line + "\n" for line in lines), newline="\n")
    logger.info(f"Wrote summary {path}")
    return path


def read_csv_body(path: str | Path) -> str:
    """The CSV body of a report, without its '#' preamble."""
    return "".join(line for line in Path(path).read_text().splitlines(keepends=True) if not line.startswith("#"))
