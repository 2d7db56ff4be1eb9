"""Result records: deterministic JSON and an aligned plain-text rendering."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


def plain(obj):
    """Convert numpy, Fraction and complex values to JSON-ready data."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        return [z.real, z.imag] if z.imag else z.real
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def digest(doc) -> str:
    canon = json.dumps(plain(doc), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def check(name, expected, got, passed=None) -> dict:
    if passed is None:
        passed = expected == got
    return {"name": name, "expected": expected, "got": got, "pass": bool(passed)}


@dataclass
class Report:
    command: str
    inputs_digest: str
    seed: int = None
    results: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # title -> (header, rows)
    checks: list = field(default_factory=list)
    timings: dict = None

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def as_dict(self) -> dict:
        out = {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "seed": self.seed,
            "results": self.results,
            "tables": {k: {"header": h, "rows": r} for k, (h, r) in self.tables.items()},
            "checks": self.checks,
            "pass": self.passed,
        }
        if self.timings is not None:
            out["timings"] = self.timings
        return plain(out)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"command: {self.command}", f"inputs:  {self.inputs_digest}"]
        if self.seed is not None:
            lines.append(f"seed:    {self.seed}")
        if self.results:
            lines.append("")
            lines += _table(["result", "value"], [[k, _fmt(v)] for k, v in self.results.items()])
        for title, (header, rows) in self.tables.items():
            lines += ["", title]
            lines += _table(header, [[_fmt(x) for x in row] for row in rows])
        if self.checks:
            lines.append("")
            rows = [[c["name"], _fmt(c["expected"]), _fmt(c["got"]), "pass" if c["pass"] else "FAIL"]
                    for c in self.checks]
            lines += _table(["check", "expected", "got", "verdict"], rows)
        if self.timings:
            lines.append("")
            lines += _table(["stage", "seconds"], [[k, f"{v:.3f}"] for k, v in self.timings.items()])
        lines += ["", "PASS" if self.passed else "FAIL"]
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    v = plain(v)
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_fmt(x)}" for k, x in v.items()) + "}"
    return str(v)


def _table(header, rows):
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(str(x))) for w, x in zip(widths, row)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*header).rstrip(), "  ".join("-" * w for w in widths)]
    out += [fmt.format(*map(str, row)).rstrip() for row in rows]
    return out
