"""Structured, losslessly serialisable experiment reports.

Every numeric value in a report is tagged:

* ``{"exact": "num/den"}`` for rationals,
* ``{"cyclo": ["num/den", ...], "p": p}`` for elements of Q(zeta_p),
* ``{"interval": ["num/den", "num/den"]}`` for certified enclosures,
* ``{"count": n}`` for integers.

Other JSON scalars (strings, booleans, lists of tags) pass through.
Wall time is the only nondeterministic field; ``to_json(deterministic=True)``
drops it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

from .cyclo import CertifiedInterval, CycloNum

SCHEMA_VERSION = 1


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    CONFIRMED = "CONFIRMED"
    VIOLATED = "VIOLATED"
    INDETERMINATE = "INDETERMINATE"
    SKIPPED = "SKIPPED"
    INFO = "INFO"


FAILING = {Verdict.FAIL, Verdict.VIOLATED}
_TAG_KEYS = [{"count"}, {"exact"}, {"interval"}, {"cyclo", "p"}]


def _ratio(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def encode_value(v: Any) -> Any:
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, Enum):
        return v.value
    if isinstance(v, int):
        return {"count": int(v)}
    if isinstance(v, Fraction):
        return {"exact": _ratio(v)}
    if isinstance(v, CycloNum):
        return {"cyclo": v.to_strings(), "p": v.p}
    if isinstance(v, CertifiedInterval):
        return {"interval": v.to_strings()}
    if isinstance(v, (list, tuple)):
        return [encode_value(x) for x in v]
    if isinstance(v, dict):
        keys = {str(k) for k in v}
        if keys in _TAG_KEYS:
            raise ValueError(f"a payload keyed only by {sorted(keys)} would read back as a tagged number")
        return {str(k): encode_value(x) for k, x in v.items()}
    if hasattr(v, "item"):  # numpy scalar
        return encode_value(v.item())
    raise TypeError(f"cannot encode {type(v).__name__} in a report")


def decode_value(v: Any) -> Any:
    if isinstance(v, list):
        return [decode_value(x) for x in v]
    if isinstance(v, dict):
        if set(v) == {"count"}:
            return int(v["count"])
        if set(v) == {"exact"}:
            return Fraction(v["exact"])
        if set(v) == {"cyclo", "p"}:
            return CycloNum.from_strings(int(v["p"]), v["cyclo"])
        if set(v) == {"interval"}:
            lo, hi = v["interval"]
            return CertifiedInterval(Fraction(lo), Fraction(hi))
        return {k: decode_value(x) for k, x in v.items()}
    return v


@dataclass
class Check:
    name: str
    verdict: Verdict
    values: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "verdict": self.verdict.value,
                "values": encode_value(self.values), "note": self.note}

    @classmethod
    def from_dict(cls, d: dict) -> "Check":
        return cls(d["name"], Verdict(d["verdict"]), decode_value(d["values"]), d.get("note", ""))


@dataclass
class Report:
    command: str
    config: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    wall_time: float | None = None
    counters: dict = field(default_factory=dict)

    def add(self, name: str, verdict: Verdict, note: str = "", **values) -> Check:
        chk = Check(name, verdict, values, note)
        self.checks.append(chk)
        return chk

    @property
    def summary(self) -> Verdict:
        verdicts = {c.verdict for c in self.checks}
        if Verdict.VIOLATED in verdicts:
            return Verdict.VIOLATED
        if Verdict.FAIL in verdicts:
            return Verdict.FAIL
        if Verdict.INDETERMINATE in verdicts:
            return Verdict.INDETERMINATE
        return Verdict.PASS

    @property
    def ok(self) -> bool:
        return not any(c.verdict in FAILING for c in self.checks)

    def verdict_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.checks:
            out[c.verdict.value] = out.get(c.verdict.value, 0) + 1
        return out

    def to_dict(self, deterministic: bool = False) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": encode_value(self.config),
            "summary": self.summary.value,
            "checks": [c.to_dict() for c in self.checks],
            "counters": encode_value(self.counters),
        }
        if not deterministic:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self, deterministic: bool = False) -> str:
        return json.dumps(self.to_dict(deterministic), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(d["command"], decode_value(d["config"]),
                   [Check.from_dict(c) for c in d["checks"]],
                   d.get("wall_time"), decode_value(d.get("counters", {})))

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        return isinstance(other, Report) and self.to_dict() == other.to_dict()
