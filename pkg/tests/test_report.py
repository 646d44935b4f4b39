from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import jsonschema
import pytest

from ffdot.cyclo import CertifiedInterval, CycloNum
from ffdot.field import make_field
from ffdot.graphs import Graph
from ffdot.lab import coverage_experiment, fourier_selftest, random_family, verify_lemma_moment_bound
from ffdot.report import Report, Verdict, decode_value, encode_value

SCHEMA = json.loads((Path(__file__).resolve().parents[1] / "docs" / "report.schema.json").read_text())


def sample_report() -> Report:
    rep = Report("demo", {"p": 5, "density": Fraction(1, 2), "sizes": [3, 4]})
    rep.add("exact", Verdict.PASS, lhs=7, rhs=Fraction(22, 3))
    rep.add("cyclo", Verdict.INFO, value=CycloNum.zeta_power(5, 2) + Fraction(1, 3))
    rep.add("box", Verdict.CONFIRMED, lhs=CertifiedInterval(Fraction(1, 3), Fraction(1, 2)),
            tight=False, terms=[Fraction(1), CycloNum.rational(3, 2)])
    rep.add("skip", Verdict.SKIPPED, note="nothing to do")
    rep.counters["ops"] = 12
    rep.wall_time = 0.25
    return rep


def test_value_tags():
    assert encode_value(3) == {"count": 3}
    assert encode_value(Fraction(-2, 4)) == {"exact": "-1/2"}
    assert encode_value(CycloNum.rational(3, 1)) == {"cyclo": ["1/1", "0/1"], "p": 3}
    assert encode_value(CertifiedInterval.point(Fraction(2))) == {"interval": ["2/1", "2/1"]}
    for v in (5, Fraction(3, 7), CycloNum.zeta_power(7, 3), CertifiedInterval(Fraction(0), Fraction(1)),
              [1, Fraction(1, 2)], {"a": True, "b": None, "c": "x"}):
        assert decode_value(encode_value(v)) == v


def test_unencodable():
    with pytest.raises(TypeError):
        encode_value(0.5)
    with pytest.raises(ValueError):
        encode_value({"count": 3})
    assert decode_value(encode_value({"count": 3, "other": 1})) == {"count": 3, "other": 1}


def test_roundtrip_lossless():
    rep = sample_report()
    back = Report.from_json(rep.to_json())
    assert back == rep
    assert back.checks[1].values["value"] == rep.checks[1].values["value"]
    assert back.wall_time == 0.25


def test_deterministic_drops_wall_time():
    rep = sample_report()
    assert "wall_time" not in rep.to_dict(deterministic=True)
    other = sample_report()
    other.wall_time = 99.0
    assert rep.to_json(deterministic=True) == other.to_json(deterministic=True)


def test_summary_and_ok():
    rep = Report("x")
    assert rep.summary is Verdict.PASS and rep.ok
    rep.add("a", Verdict.INDETERMINATE)
    assert rep.summary is Verdict.INDETERMINATE and rep.ok
    rep.add("b", Verdict.FAIL)
    assert rep.summary is Verdict.FAIL and not rep.ok
    rep.add("c", Verdict.VIOLATED)
    assert rep.summary is Verdict.VIOLATED
    assert rep.verdict_counts() == {"INDETERMINATE": 1, "FAIL": 1, "VIOLATED": 1}


def test_schema_accepts_generated_reports():
    f = make_field(3)
    reports = [
        sample_report(),
        fourier_selftest(f, 2, 2, 0),
        verify_lemma_moment_bound(random_family(f, 2, [3], 1), random_family(f, 2, [4], 2)[0]),
        coverage_experiment(Graph.path(3), random_family(f, 2, [4, 4, 4], 3), Fraction(1, 2), 3, count=True),
    ]
    for rep in reports:
        jsonschema.validate(json.loads(rep.to_json()), SCHEMA)
        jsonschema.validate(rep.to_dict(deterministic=True), SCHEMA)


def test_schema_rejects_untagged_numbers():
    bad = sample_report().to_dict()
    bad["checks"][0]["values"]["lhs"] = 7
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, SCHEMA)
