"""Deterministic serialization of results: JSON, CSV and markdown."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

FORMATS = ("json", "csv", "markdown")


def _float(x: float):
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return float(f"{x:.15g}")


def plain(obj: Any) -> Any:
    """Convert results into JSON-ready values: Fractions become "num/den", floats keep 15 significant digits."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, str) else k: plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    return repr(obj)


def _rows(results) -> list[dict]:
    if isinstance(results, dict) and "rows" in results:
        results = results["rows"]
    if not isinstance(results, list):
        results = [results]
    return [plain(r) for r in results]


def emit_report(results: Any, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(plain(results), sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        rows = _rows(results)
        if not rows:
            return ""
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(v) for k, v in r.items()})
        return buf.getvalue()
    if fmt == "markdown":
        rows = _rows(results)
        if not rows:
            return ""
        head = list(rows[0])
        body = [[_cell(r.get(h)) for h in head] for r in rows]
        widths = [max(len(h), *(len(b[i]) for b in body)) for i, h in enumerate(head)]
        line = lambda cells: "| " + " | ".join(c.rjust(w) for c, w in zip(cells, widths)) + " |"
        sep = "|" + "|".join("-" * (w + 1) + ":" for w in widths) + "|"
        return "\n".join([line(head), sep] + [line(b) for b in body]) + "\n"
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def _cell(v) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return "" if v is None else str(v)


def write_report(text: str, path: str | None) -> None:
    if path is None:
        print(text, end="")
        return
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise OSError(f"cannot write report to {path}: {e}") from e
