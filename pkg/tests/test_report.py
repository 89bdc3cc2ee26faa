"""Tests for JSON documents and tables."""

import json

import pytest

from sphere_roots.polysys import GenerationRecord, sample_system, system_to_dict
from sphere_roots.report import (
    format_run_report,
    format_table,
    load_system,
    read_json,
    strip_timings,
    write_json,
)


class TestJson:
    def test_schema_version_added(self, tmp_path):
        path = write_json({"kind": "probe"}, tmp_path / "sub" / "p.json")
        assert read_json(path) == {"schema_version": 1, "kind": "probe"}

    def test_wrong_version(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text(json.dumps({"schema_version": 2, "kind": "system"}))
        with pytest.raises(ValueError, match="schema_version"):
            read_json(path)

    def test_not_an_object(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text("[1, 2]")
        with pytest.raises(ValueError):
            read_json(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text("{")
        with pytest.raises(ValueError, match="invalid JSON"):
            read_json(path)


class TestLoadSystem:
    def test_system_document(self, tmp_path):
        sys = sample_system(3, [2, 3], 1)
        path = write_json(system_to_dict(sys), tmp_path / "s.json")
        loaded, descriptor = load_system(path)
        assert loaded.degrees == (2, 3)
        assert descriptor["kind"] == "system"

    def test_generation_document(self, tmp_path):
        path = write_json(GenerationRecord(3, (2,), 4).to_dict(), tmp_path / "g.json")
        loaded, descriptor = load_system(path)
        assert loaded.polys[0].coeffs.tolist() == sample_system(3, [2], 4).polys[0].coeffs.tolist()
        assert descriptor["seed"] == 4

    def test_other_kind(self, tmp_path):
        path = write_json({"kind": "run"}, tmp_path / "r.json")
        with pytest.raises(ValueError, match="kind"):
            load_system(path)


class TestFormatting:
    def test_strip_timings(self):
        doc = {"a": 1, "timings": {"solve": 0.1}, "runs": [{"seconds": 2.0, "d": 4}]}
        assert strip_timings(doc) == {"a": 1, "runs": [{"d": 4}]}

    def test_table(self):
        text = format_table(["x", "flag"], [[1.23456, True], [None, False]], "demo")
        assert "【demo】" in text
        assert "1.235" in text
        assert "yes" in text
        assert "-" in text

    def test_run_report_false(self):
        doc = {
            "regime": "Λ2", "algorithm": "mss", "n": 2, "reason": "worklist exhausted",
            "outcome": None, "certification": None, "failure_bound": 0.5, "warnings": ["w"],
        }
        text = format_run_report(doc)
        assert "outcome: FALSE" in text
        assert "failure bound: 0.5" in text
        assert "warning: w" in text
