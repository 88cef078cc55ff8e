"""Experiment reports: verdicts, tables and deterministic serialisation."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class Verdict:
    name: str
    anchor: str
    passed: bool
    observed: object = None
    expected: object = None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "passed": bool(self.passed),
            "observed": self.observed,
            "expected": self.expected,
        }

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: observed={_short(self.observed)} expected={_short(self.expected)} ({self.anchor})"


def _short(x) -> str:
    text = json.dumps(sanitize(x))
    return text if len(text) <= 80 else text[:77] + "..."


@dataclass
class CommandReport:
    command: str
    results: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # name -> (header, rows)
    verdicts: list = field(default_factory=list)

    def check(self, name: str, anchor: str, passed: bool, observed=None, expected=None) -> Verdict:
        v = Verdict(name, anchor, bool(passed), observed, expected)
        self.verdicts.append(v)
        return v

    def table(self, name: str, header, rows) -> None:
        self.tables[name] = (list(header), [list(r) for r in rows])

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "passed": self.passed,
            "results": self.results,
            "verdicts": [v.to_json() for v in self.verdicts],
        }


def sanitize(obj):
    """JSON-safe copy: tuples to lists, non-finite floats to strings, numpy scalars to Python."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(obj) -> str:
    return json.dumps(sanitize(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def write_csv_tables(out_dir, report: CommandReport) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    tables = dict(report.tables)
    tables["verdicts"] = (
        ["name", "passed", "observed", "expected", "anchor"],
        [[v.name, v.passed, json.dumps(sanitize(v.observed)), json.dumps(sanitize(v.expected)), v.anchor]
         for v in report.verdicts],
    )
    for name, (header, rows) in sorted(tables.items()):
        path = out_dir / f"{report.command}_{name}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(sanitize(rows))
        written.append(path)
    return written
