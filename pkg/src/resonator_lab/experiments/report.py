"""Serializable experiment reports (JSON and flat CSV)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np


def _plain(x):
    """Convert numpy scalars, fractions and complex numbers to JSON-safe values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _plain(float(x.real)), "im": _plain(float(x.imag))}
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return str(x)
    return x


@dataclass
class Report:
    """Named experiment with its parameters, constants, series and checks.

    Series rows are ``[param, raw, compensated, error_estimate]`` where
    ``compensated = raw / prediction`` and the prediction formula is stored
    under ``constants['prediction']``.
    """

    experiment: str
    params: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    series: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def add_point(self, param, raw, compensated=None, error_estimate=0.0):
        self.series.append([param, raw, compensated, error_estimate])

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append({"name": name, "pass": bool(ok), "detail": detail})
        return bool(ok)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def failed_checks(self) -> list[dict]:
        return [c for c in self.checks if not c["pass"]]

    def to_dict(self, timestamp: bool = True) -> dict:
        out = {
            "experiment": self.experiment,
            "params": _plain(self.params),
            "constants": _plain(self.constants),
            "series": _plain(self.series),
            "checks": _plain(self.checks),
        }
        if timestamp:
            out["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return out

    def to_json(self, timestamp: bool = True) -> str:
        return json.dumps(self.to_dict(timestamp), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "raw", "compensated", "error_estimate"])
        for row in self.series:
            w.writerow([_csv_cell(v) for v in row])
        return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)
