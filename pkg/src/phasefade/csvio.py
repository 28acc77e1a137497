"""CSV emission with ``#``-prefixed provenance comments."""

from __future__ import annotations

import csv
import io
import math
from typing import Any, Iterable, Mapping, Sequence

from . import __version__


def format_value(value: Any) -> str:
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if value != 0.0 and abs(value) < 1e-3:
            return f"{value:.9e}"
        return f"{value:.12g}"
    try:
        return format_value(float(value))
    except (TypeError, ValueError):
        return str(value)


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]],
               meta: Mapping[str, Any] | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# phasefade {__version__}\n")
    for key, value in (meta or {}).items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def read_csv(text: str) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Parse our own CSV back into (comment metadata, rows)."""
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition(": ")
            if sep:
                meta[key] = value
        elif line.strip():
            body.append(line)
    return meta, list(csv.DictReader(body))
