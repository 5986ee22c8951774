"""Diagnostics shared by every analysis stage.

A :class:`Diagnostic` is the single output unit of the checker: a severity,
a stable rule code, a human message and the source span it points at.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


class Code:
    """Stable rule codes. Never renumber."""

    PARSE_UNEXPECTED_TOKEN = "E-PARSE-001"
    PARSE_DUPLICATE_ID = "E-PARSE-002"
    PARSE_UNKNOWN_PROPERTY = "E-PARSE-003"
    PARSE_INVALID_TAG = "E-PARSE-004"

    RES_UNKNOWN_ID = "E-RES-001"
    RES_ENDPOINT_CLASS = "E-RES-002"

    VAL_LAYER_CONFORMANCE = "E-VAL-001"
    VAL_DELEGATION_TRIAD = "E-VAL-002"
    VAL_PERSON_TYPE = "E-VAL-003"
    VAL_FORCE_DIRECTION = "E-VAL-004"
    VAL_ROLE_CONSISTENCY = "E-VAL-005"
    VAL_EMPTY_CRITERIA = "E-VAL-006"
    VAL_DEMAND_PROVENANCE = "E-VAL-007"

    APP_MISSING_LINK = "E-APP-001"

    INT_DELEGATION_CYCLE = "E-INT-001"


DESCRIPTIONS: dict[str, str] = {
    Code.PARSE_UNEXPECTED_TOKEN: "unexpected token",
    Code.PARSE_DUPLICATE_ID: "duplicate identifier",
    Code.PARSE_UNKNOWN_PROPERTY: "unknown property for class",
    Code.PARSE_INVALID_TAG: "invalid tag syntax",
    Code.RES_UNKNOWN_ID: "unknown identifier",
    Code.RES_ENDPOINT_CLASS: "relationship endpoint violates class constraint",
    Code.VAL_LAYER_CONFORMANCE: "instance does not conform to its class blueprint",
    Code.VAL_DELEGATION_TRIAD: "incomplete or ill-typed delegation triad",
    Code.VAL_PERSON_TYPE: "stakeholder person type does not satisfy legal subject",
    Code.VAL_FORCE_DIRECTION: "consistency relationship points from stronger to weaker act",
    Code.VAL_ROLE_CONSISTENCY: "sign-off by a role not responsible for the milestone",
    Code.VAL_EMPTY_CRITERIA: "referenced jurisdiction or field of law has no criteria",
    Code.VAL_DEMAND_PROVENANCE: "regulatory demand source act is missing or inapplicable",
    Code.APP_MISSING_LINK: "act lacks jurisdiction or field-of-law link",
    Code.INT_DELEGATION_CYCLE: "delegation cycle",
}


@dataclass(frozen=True, order=True)
class SourceSpan:
    """1-based location range; ``end_col`` is exclusive."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError(f"span start after end: {self}")

    def cover(self, other: "SourceSpan") -> "SourceSpan":
        return SourceSpan(
            self.file, self.start_line, self.start_col, other.end_line, other.end_col
        )

    def text(self, source: str) -> str:
        """Return the slice of ``source`` this span covers."""
        lines = source.replace("\r\n", "\n").split("\n")
        if self.start_line == self.end_line:
            return lines[self.start_line - 1][self.start_col - 1 : self.end_col - 1]
        parts = [lines[self.start_line - 1][self.start_col - 1 :]]
        parts.extend(lines[self.start_line : self.end_line - 1])
        parts.append(lines[self.end_line - 1][: self.end_col - 1])
        return "\n".join(parts)

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"

    def to_dict(self) -> dict:
        return {
            "file": self.file,
            "start_line": self.start_line,
            "start_col": self.start_col,
            "end_line": self.end_line,
            "end_col": self.end_col,
        }


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: Optional[SourceSpan] = None
    related_spans: tuple[SourceSpan, ...] = ()
    # id of the instance the finding is about; used for per-layer filtering
    subject: Optional[str] = None

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def sort_key(self) -> tuple:
        span = self.span
        loc = (span.file, span.start_line, span.start_col) if span else ("", 0, 0)
        return (self.code, loc, self.message)

    def escalated(self) -> "Diagnostic":
        if self.severity is Severity.WARNING:
            return replace(self, severity=Severity.ERROR)
        return self

    def format(self) -> str:
        where = str(self.span) if self.span else "<model>"
        return f"{where}: {self.severity.value}[{self.code}]: {self.message}"

    def to_dict(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "message": self.message,
            "span": self.span.to_dict() if self.span else None,
            "related_spans": [s.to_dict() for s in self.related_spans],
            "subject": self.subject,
        }


def error(code: str, message: str, span=None, **kw) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, span, **kw)


def warning(code: str, message: str, span=None, **kw) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, span, **kw)


def canonical(diagnostics: Iterable[Diagnostic]) -> list[Diagnostic]:
    """Sort by (code, span) and drop exact duplicates."""
    seen: dict[Diagnostic, None] = {}
    for d in diagnostics:
        seen.setdefault(d, None)
    return sorted(seen, key=Diagnostic.sort_key)


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)
