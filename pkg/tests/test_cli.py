import io
import json
from importlib.resources import files

import jsonschema
import pytest

from am4rre.cli import run
from am4rre.report import SCHEMA_ID

from helpers import fixture_path, fixture_text, mutate


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(autouse=True)
def no_color(monkeypatch):
    monkeypatch.setenv("AM4RRE_COLOR", "never")


@pytest.fixture
def write(tmp_path):
    def _write(text, name="model.amr"):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return _write


def schema():
    return json.loads((files("am4rre") / "data" / "report.schema.json").read_text("utf-8"))


def test_check_clean():
    code, out, _ = call("check", fixture_path())
    assert code == 0
    assert out.strip() == "0 error(s), 0 warning(s)"


def test_check_reports_location(write):
    text = mutate(fixture_text(), "stakeholder Alice {\n  person: natural", "stakeholder Alice {\n  person: legal")
    path = write(text)
    code, out, _ = call("check", path)
    assert code == 1
    line = next(l for l in out.splitlines() if "E-VAL-003" in l)
    expected_line = text.splitlines().index("rel data_subject maps_to Alice") + 1
    assert line.startswith(f"{path}:{expected_line}:")
    assert "error[E-VAL-003]" in line


def test_parse_error_exit_code(write):
    code, out, _ = call("check", write("act A { kind: treaty }\n"))
    assert code == 1
    assert "E-PARSE-001" in out


def test_warning_only_exit_and_strict(write):
    path = write("act A { kind: law }\n")
    code, out, _ = call("check", path)
    assert code == 0
    assert "warning[E-APP-001]" in out
    code, out, _ = call("check", "--strict", path)
    assert code == 1
    assert "error[E-APP-001]" in out


def test_usage_errors():
    assert call()[0] == 2
    assert call("frobnicate", "x")[0] == 2
    assert call("check")[0] == 2
    assert call("report", fixture_path())[0] == 2
    code, _, err = call("check", "/nonexistent/file.amr")
    assert code == 2 and "cannot read" in err


def test_applicability_human():
    code, out, _ = call("applicability", fixture_path())
    assert code == 0
    assert "GDPR: applicable" in out
    assert "EDPB_07_2020: applicable" in out
    assert "priority: GDPR, EDPB_07_2020" in out


def test_trace_and_no_derived():
    _, out, _ = call("trace", fixture_path())
    assert "data_processor owes_duty_to data_subject (depth 1)" in out
    _, out, _ = call("trace", "--no-derived", fixture_path())
    assert "owes_duty_to" not in out
    _, out, _ = call("trace", "--format", "json", "--no-derived", fixture_path())
    assert json.loads(out)["trace"]["derived_relationships"] == []


def test_milestones_human():
    code, out, _ = call("milestones", fixture_path())
    assert code == 0
    assert out.splitlines()[:2] == ["M1: Accepted", "M2: Accepted"]
    assert "M4: NotStarted" in out


def test_report_schema_and_content(tmp_path):
    target = tmp_path / "r.json"
    code, _, _ = call("report", fixture_path(), "--json", str(target))
    assert code == 0
    doc = json.loads(target.read_text())
    jsonschema.validate(doc, schema())
    assert doc["schema"] == SCHEMA_ID
    assert doc["applicability"]["priority"] == ["GDPR", "EDPB_07_2020"]
    assert [m["state"] for m in doc["milestones"]] == ["Accepted", "Accepted", "ContentComplete", "NotStarted"]
    assert "generated_at" not in doc


def test_report_with_errors_validates(tmp_path, write):
    path = write("act A { kind: law }\nrel A maps_to B\n")
    target = tmp_path / "r.json"
    code, _, _ = call("report", path, "--json", str(target), "--timestamps")
    assert code == 1
    doc = json.loads(target.read_text())
    jsonschema.validate(doc, schema())
    assert doc["stage"] == "parse"
    assert "generated_at" in doc


def test_report_byte_stable(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    call("report", fixture_path(), "--json", str(a))
    call("report", fixture_path(), "--json", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_json_format_check():
    code, out, _ = call("check", "--format", "json", fixture_path())
    doc = json.loads(out)
    assert code == 0
    assert doc["summary"] == {"errors": 0, "warnings": 0, "infos": 0}


def test_fmt_round_trip(write):
    code, out, _ = call("fmt", fixture_path())
    assert code == 0
    code2, out2, _ = call("fmt", write(out))
    assert code2 == 0 and out2 == out


def test_fmt_refuses_broken_input(write):
    code, out, err = call("fmt", write("act A { kind: }\n"))
    assert code == 1
    assert out == ""
    assert "E-PARSE" in err


def test_multiple_files_share_namespace(write):
    a = write("act A { kind: law }\n", "a.amr")
    b = write("rel A applies_within J\njurisdiction J { criteria: [loc:EU] }\n", "b.amr")
    code, out, _ = call("check", a, b)
    assert "E-RES" not in out
