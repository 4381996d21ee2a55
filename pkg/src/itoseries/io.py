"""CSV/JSON emission with round-trip-safe float formatting."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


def fmt_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def _scalar(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if v is None:
        return "null"
    return json.dumps(str(v))


def dumps(obj: Any, indent: int | None = None, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    if isinstance(obj, Mapping):
        items = [f"{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return _join("{", "}", items, indent, _level)
    if isinstance(obj, (list, tuple, np.ndarray)):
        return _join("[", "]", [dumps(v, None) for v in obj], None, _level)
    return _scalar(obj)


def _join(open_, close, items, indent, level):
    if not items:
        return open_ + close
    if indent is None:
        return open_ + ", ".join(items) + close
    pad = " " * (indent * (level + 1))
    return open_ + "\n" + ",\n".join(pad + it for it in items) + "\n" + " " * (indent * level) + close


def to_csv(records: Sequence[Mapping[str, Any]], columns: Sequence[str] | None = None) -> str:
    if columns is None:
        if not records:
            raise ValueError("column names are required for an empty record list")
        columns = list(records[0])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        if list(rec) != list(columns):
            raise ValueError(f"heterogeneous record keys: {list(rec)} vs {list(columns)}")
        writer.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in rec.values()])
    return buf.getvalue()


def to_json(records: Sequence[Mapping[str, Any]]) -> str:
    keys = None
    for rec in records:
        if keys is None:
            keys = list(rec)
        elif list(rec) != keys:
            raise ValueError("heterogeneous record keys")
    return "[" + ",\n ".join(dumps(r) for r in records) + "]\n"


def emit(records: Sequence[Mapping[str, Any]], fmt: str, path: str | Path | None,
         columns: Sequence[str] | None = None) -> str:
    """Write ``records`` as CSV (header row first) or as a JSON array.

    Returns the text; writes it to ``path`` when given ("-" or None means
    the caller prints it).
    """
    if fmt == "csv":
        text = to_csv(records, columns)
    elif fmt == "json":
        text = to_json(records)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path not in (None, "-"):
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return text


def read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def parse_records(text: str, fmt: str) -> list[dict[str, Any]]:
    if fmt == "json":
        return json.loads(text)
    rows = read_csv(text)
    out = []
    for row in rows:
        conv = {}
        for k, v in row.items():
            try:
                conv[k] = int(v)
            except ValueError:
                try:
                    conv[k] = float(v)
                except ValueError:
                    conv[k] = v
        out.append(conv)
    return out


def iter_lines(items: Iterable[Any]) -> str:
    return "".join(f"{it}\n" for it in items)
