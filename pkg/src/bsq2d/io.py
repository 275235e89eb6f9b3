"""CSV and JSON output with deterministic float formatting."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .experiment import BASE_COLUMNS, DiagnosticsRow, ledger_columns

__all__ = ["fmt", "to_jsonable", "write_json", "write_rows_csv", "read_csv", "write_resonance_csv"]


def fmt(x: float) -> str:
    """17 significant digits, enough to round-trip every double."""
    return format(float(x), ".17g")


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars, dataclasses and enums; non-finite floats become ``None``."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path: str | Path, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=False) + "\n")
    return path


def write_rows_csv(path: str | Path, rows: Iterable[DiagnosticsRow]) -> Path:
    """Fixed header ``t,E_N0,...,profile_ratio`` then the ledger columns."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = ledger_columns()
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(BASE_COLUMNS) + cols)
        for r in rows:
            w.writerow([fmt(x) for x in r.values(cols)])
    return path


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_resonance_csv(path: str | Path, result) -> Path:
    """Accepted resonance points: ``xi1, xi2, eta1, eta2, phi_value, tags``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["xi1", "xi2", "eta1", "eta2", "phi_value", "tags"])
        for xi, eta, ph, tag in zip(result.xi, result.eta, result.phi, result.tags):
            w.writerow([fmt(xi[0]), fmt(xi[1]), fmt(eta[0]), fmt(eta[1]), fmt(ph), tag])
    return path
