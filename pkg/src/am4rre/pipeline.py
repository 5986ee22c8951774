"""parse -> resolve -> validate -> infer, as one call.

Every consumer (CLI, report, tests) goes through :func:`analyze` so the
views it presents cannot disagree with each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .applicability import ApplicabilityResult, compute_applicability
from .diagnostics import Code, Diagnostic, canonical, has_errors
from .interpretation import TraceReport, coverage
from .metamodel import ArtifactModel
from .milestones import MilestoneStatus, milestone_status
from .resolver import resolve
from .specfmt import ParseResult, merge, parse
from .validator import check


@dataclass
class Analysis:
    model: ArtifactModel
    diagnostics: list[Diagnostic] = field(default_factory=list)
    applicability: Optional[ApplicabilityResult] = None
    trace: Optional[TraceReport] = None
    milestones: Optional[MilestoneStatus] = None
    stage: str = "parse"  # last stage that ran to completion

    @property
    def has_errors(self) -> bool:
        return has_errors(self.diagnostics)


def analyze_model(
    model: ArtifactModel, derive: bool = True, prior: Sequence[Diagnostic] = ()
) -> Analysis:
    """Run every analysis on an unresolved, parse-clean model."""
    diagnostics = list(prior)
    resolved, res_diags = resolve(model)
    diagnostics += res_diags
    if res_diags:
        return Analysis(model, canonical(diagnostics), stage="parse")

    val_diags = check(resolved)
    applicability = None
    # sign-off roles are not an input to applicability, so V5 does not gate it
    if not has_errors(d for d in val_diags if d.code != Code.VAL_ROLE_CONSISTENCY):
        applicability = compute_applicability(resolved)
        val_diags = check(resolved, applicability)
        diagnostics += applicability.diagnostics
    diagnostics += val_diags
    trace = coverage(resolved, derive=derive)
    diagnostics += trace.diagnostics
    diagnostics = canonical(diagnostics)
    status = milestone_status(resolved, applicability, trace, diagnostics)
    return Analysis(resolved, diagnostics, applicability, trace, status, stage="infer")


def analyze_parsed(result: ParseResult, derive: bool = True) -> Analysis:
    if result.partial:
        return Analysis(result.model, canonical(result.diagnostics), stage="parse")
    return analyze_model(result.model, derive=derive, prior=result.diagnostics)


def analyze(
    sources: Sequence[tuple[str, str]] | str, derive: bool = True
) -> Analysis:
    """Analyze ``.amr`` text.

    ``sources`` is either one source string or a sequence of
    ``(name, text)`` pairs that together form one project.
    """
    if isinstance(sources, str):
        result = parse(sources)
    else:
        result = merge([parse(text, name) for name, text in sources])
    return analyze_parsed(result, derive=derive)
