"""Check reports shared by all verification routines, with text/JSON emitters."""

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import GaussRational, format_scalar


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    witness: str = ""


@dataclass
class Report:
    command: str = ""
    checks: list = field(default_factory=list)
    values: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)

    def add(self, name, passed, detail="", witness=""):
        self.checks.append(Check(name, bool(passed), detail, witness))
        return passed

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def merge(self, other, prefix=""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.detail, c.witness))
        for k, v in other.values.items():
            self.values[prefix + k] = v
        for k, v in other.tables.items():
            self.tables[prefix + k] = v
        return self


def _jsonable(v):
    if isinstance(v, (Fraction, GaussRational)):
        return format_scalar(v)
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return format_scalar(Fraction(v))
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return str(v)


def to_dict(r):
    out = {"checks": [{"name": c.name, "passed": c.passed, "detail": c.detail, "witness": c.witness}
                      for c in r.checks]}
    if r.command:
        out["command"] = r.command
    if r.values:
        out["values"] = _jsonable(r.values)
    if r.tables:
        # integer cells are counts and stay plain; rationals are p/q
        out["tables"] = {k: [[format_scalar(x) if isinstance(x, (Fraction, GaussRational)) else x
                              for x in row] for row in rows]
                         for k, rows in r.tables.items()}
    if r.checks:
        out["passed"] = r.passed
    return out


def emit_report(r, fmt="text"):
    if fmt == "json":
        return json.dumps(to_dict(r), sort_keys=True, separators=(",", ":"))
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = []
    if r.command:
        lines.append(f"command: {r.command}")
    for c in r.checks:
        line = f"[{'PASS' if c.passed else 'FAIL'}] {c.name}"
        if c.detail:
            line += f": {c.detail}"
        lines.append(line)
        if c.witness:
            lines.append(f"    witness: {c.witness}")
    for k in sorted(r.values):
        lines.append(f"{k} = {_text_value(r.values[k])}")
    for k in sorted(r.tables):
        lines.append(f"table {k}:")
        for row in r.tables[k]:
            lines.append("    " + "  ".join(str(x) for x in row))
    if r.checks:
        lines.append("result: " + ("PASS" if r.passed else "FAIL"))
    return "\n".join(lines)


def _text_value(v):
    if isinstance(v, (Fraction, GaussRational, int)) and not isinstance(v, bool):
        return format_scalar(Fraction(v) if isinstance(v, int) else v)
    return str(v)
