"""The aggregated JSON report (schema ``am4rre-report/1``)."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from importlib.resources import files
from typing import Sequence

from .diagnostics import Diagnostic, Severity
from .pipeline import Analysis

SCHEMA_ID = "am4rre-report/1"


def load_schema() -> dict:
    """The JSON Schema shipped with the package."""
    return json.loads((files("am4rre") / "data" / "report.schema.json").read_text("utf-8"))


def effective_diagnostics(analysis: Analysis, strict: bool = False) -> list[Diagnostic]:
    if not strict:
        return list(analysis.diagnostics)
    return [d.escalated() for d in analysis.diagnostics]


def exit_code(diagnostics: Sequence[Diagnostic]) -> int:
    return 1 if any(d.severity is Severity.ERROR for d in diagnostics) else 0


def build_report(
    analysis: Analysis,
    sources: Sequence[str],
    *,
    strict: bool = False,
    derive: bool = True,
    timestamps: bool = False,
) -> dict:
    from . import __version__

    diags = effective_diagnostics(analysis, strict)
    counts = {s.value: 0 for s in Severity}
    for d in diags:
        counts[d.severity.value] += 1
    doc = {
        "schema": SCHEMA_ID,
        "tool_version": __version__,
        "sources": list(sources),
        "stage": analysis.stage,
        "summary": {
            "errors": counts["error"],
            "warnings": counts["warning"],
            "infos": counts["info"],
        },
        "diagnostics": [d.to_dict() for d in diags],
        "applicability": analysis.applicability.to_dict() if analysis.applicability else None,
        "trace": analysis.trace.to_dict(include_derived=derive) if analysis.trace else None,
        "milestones": analysis.milestones.to_dict() if analysis.milestones else None,
    }
    if timestamps:
        doc["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return doc


def dumps(doc: dict) -> str:
    """Canonical serialization: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
