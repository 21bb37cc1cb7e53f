"""Structured verification reports with JSON and CSV emitters.

JSON numbers are written with 17 significant digits, which is enough for
every double to parse back to the identical value. Non-finite floats are
written as the strings "NaN", "Infinity" and "-Infinity".
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
INFO = "info"
STATUSES = (PASS, FAIL, INFO)
PLUMBING = "plumbing"

_NONFINITE = {"NaN": math.nan, "Infinity": math.inf, "-Infinity": -math.inf}


@dataclass
class Record:
    id: str
    anchor: str
    status: str
    values: dict = field(default_factory=dict)
    tolerance: float | None = None
    runtime_ms: float | None = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")
        if not self.anchor:
            raise ValueError("every record needs an anchor (or 'plumbing')")

    def to_dict(self) -> dict:
        out = {"id": self.id, "anchor": self.anchor, "status": self.status, "values": self.values}
        out["tolerance"] = self.tolerance
        if self.runtime_ms is not None:
            out["runtime_ms"] = self.runtime_ms
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Record":
        return cls(d["id"], d["anchor"], d["status"], dict(d["values"]), d.get("tolerance"), d.get("runtime_ms"))


def check(id: str, anchor: str, passed: bool, values: dict, tolerance: float | None = None) -> Record:
    return Record(id, anchor, PASS if passed else FAIL, values, tolerance)


def info(id: str, anchor: str, values: dict) -> Record:
    return Record(id, anchor, INFO, values)


@dataclass
class VerificationReport:
    suite: str
    config: dict
    records: list = field(default_factory=list)

    @property
    def summary(self) -> dict:
        counts = {s: sum(r.status == s for r in self.records) for s in STATUSES}
        return {"total": len(self.records), **counts, "ok": counts[FAIL] == 0}

    @property
    def ok(self) -> bool:
        return self.summary["ok"]

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "config": self.config,
            "records": [r.to_dict() for r in self.records],
            "summary": self.summary,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls(d["suite"], dict(d["config"]), [Record.from_dict(r) for r in d["records"]])

    def to_json(self) -> str:
        return emit_json(self.to_dict()) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(_restore(json.loads(text)))

    def to_csv(self) -> str:
        """One row per record: id, anchor, status, tolerance, then the union of value keys.

        List values are joined with ';'.
        """
        keys: list = []
        for r in self.records:
            for key in r.values:
                if key not in keys:
                    keys.append(key)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["id", "anchor", "status", "tolerance", *keys])
        for r in self.records:
            w.writerow([r.id, r.anchor, r.status, _cell(r.tolerance), *(_cell(r.values.get(k)) for k in keys)])
        return buf.getvalue()


def _number(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    text = format(x, ".17g")
    # keep floats recognisable as floats after parsing
    return text if any(c in text for c in ".e") else text + ".0"


def emit_json(obj, indent: int = 2, level: int = 0) -> str:
    """json.dumps with floats at 17 significant digits."""
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _number(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {emit_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{emit_json(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if hasattr(obj, "item"):  # numpy scalars
        return emit_json(obj.item(), indent, level)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _restore(obj):
    if isinstance(obj, str) and obj in _NONFINITE:
        return _NONFINITE[obj]
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    return obj


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    return str(v)
