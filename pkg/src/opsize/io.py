"""CSV and JSON writers with round-trip float formatting.

Floats are written with ``repr`` (the shortest string that round-trips), so
identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

__all__ = ["SCHEMA_VERSION", "format_value", "to_jsonable", "write_csv", "write_json"]

SCHEMA_VERSION = 1


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


@contextmanager
def _open(path):
    if path is None or str(path) == "-":
        yield sys.stdout
        return
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        yield fh


def write_csv(path, header, rows) -> None:
    """Write ``header`` and ``rows`` (iterables of scalars) to ``path`` or stdout."""
    with _open(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else repr(value)
    if isinstance(obj, complex):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    return obj


def write_json(path, payload: dict) -> None:
    """Write ``payload`` with a leading ``schema_version`` field."""
    body = {"schema_version": SCHEMA_VERSION}
    body.update(to_jsonable(payload))
    with _open(path) as fh:
        json.dump(body, fh, indent=2, allow_nan=False)
        fh.write("\n")
