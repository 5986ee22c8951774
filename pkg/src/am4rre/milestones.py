"""Process-model milestone status.

Each milestone is ``NOT_STARTED`` until its content conditions hold, then
``CONTENT_COMPLETE``, then ``ACCEPTED`` once every accepting role has signed
it off. Milestones form a chain: content completeness of Mk needs M(k-1) to
be at least content complete, and acceptance of Mk needs M(k-1) accepted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

from .applicability import ApplicabilityResult
from .diagnostics import Code, Diagnostic, SourceSpan
from .interpretation import TraceReport
from .metamodel import (
    ACCEPTING_ROLES,
    MILESTONE_TITLES,
    ArtifactModel,
    ConceptClass,
    Layer,
    Milestone,
    RelationshipKind,
)


class State(Enum):
    NOT_STARTED = 0
    CONTENT_COMPLETE = 1
    ACCEPTED = 2

    def __lt__(self, other: "State") -> bool:
        if not isinstance(other, State):
            return NotImplemented
        return self.value < other.value

    def __le__(self, other: "State") -> bool:
        if not isinstance(other, State):
            return NotImplemented
        return self.value <= other.value

    @property
    def label(self) -> str:
        return {0: "NotStarted", 1: "ContentComplete", 2: "Accepted"}[self.value]


@dataclass(frozen=True)
class Blocker:
    reason: str
    span: Optional[SourceSpan] = None

    def to_dict(self) -> dict:
        return {"reason": self.reason, "span": self.span.to_dict() if self.span else None}


@dataclass(frozen=True)
class MilestoneState:
    milestone: Milestone
    state: State
    blocking_reasons: tuple[Blocker, ...] = ()

    def to_dict(self) -> dict:
        return {
            "milestone": self.milestone.name,
            "title": MILESTONE_TITLES[self.milestone],
            "state": self.state.label,
            "blocking_reasons": [b.to_dict() for b in self.blocking_reasons],
        }


@dataclass(frozen=True)
class MilestoneStatus:
    states: tuple[MilestoneState, ...]

    def __getitem__(self, milestone: Milestone) -> MilestoneState:
        return self.states[milestone.value - 1]

    def state(self, milestone: Milestone) -> State:
        return self[milestone].state

    def to_dict(self) -> list[dict]:
        return [s.to_dict() for s in self.states]


def _errors(diagnostics: Iterable[Diagnostic], codes: Optional[set[str]] = None) -> list[Diagnostic]:
    return [d for d in diagnostics if d.is_error and (codes is None or d.code in codes)]


def _layer_errors(model: ArtifactModel, diagnostics, layer: Layer) -> list[Diagnostic]:
    out = []
    for d in _errors(diagnostics):
        inst = model.get(d.subject) if d.subject else None
        if inst is not None and inst.layer is layer:
            out.append(d)
    return out


def _diag_blockers(diags: Sequence[Diagnostic]) -> list[Blocker]:
    return [Blocker(f"{d.code}: {d.message}", d.span) for d in diags]


def _m1(model: ArtifactModel, **_) -> list[Blocker]:
    scopes = model.of_class(ConceptClass.PROJECT_SCOPE)
    if any((s.get("description") or "").strip() for s in scopes):
        return []
    return [Blocker("no project scope with a non-empty description")]


def _m2(model: ArtifactModel, applicability, diagnostics, **_) -> list[Blocker]:
    out = []
    acts = model.of_class(ConceptClass.REGULATORY_ACT)
    if not acts:
        out.append(Blocker("no regulatory act declared"))
    for act in acts:
        for kind in (RelationshipKind.APPLIES_WITHIN, RelationshipKind.BELONGS_TO_FIELD):
            if next(model.relations(kind, source=act.id), None) is None:
                out.append(Blocker(f"act {act.id} has no {kind.keyword} link", act.span))
    out += _diag_blockers(_layer_errors(model, diagnostics, Layer.REGULATORY_CONTEXT))
    if applicability is None:
        out.append(Blocker("applicability not computed; the model has validator errors"))
    return out


_V2_V3 = {Code.VAL_DELEGATION_TRIAD, Code.VAL_PERSON_TYPE}


def _m3(model: ArtifactModel, applicability, diagnostics, **_) -> list[Blocker]:
    out = []
    applicable = applicability.applicable if applicability is not None else ()
    if not applicable:
        out.append(Blocker("no applicable regulatory act"))
    demands_layer = {i.id for i in model.in_layer(Layer.REGULATORY_DEMANDS)}
    for act_id in applicable:
        if not any(
            r.target in demands_layer
            for r in model.relations(RelationshipKind.CONTAINS, source=act_id)
        ):
            out.append(
                Blocker(
                    f"applicable act {act_id} contains no legal subject or demand",
                    model[act_id].span,
                )
            )
    out += _diag_blockers(_errors(diagnostics, _V2_V3))
    mapped = {r.source for r in model.relations(RelationshipKind.MAPS_TO)}
    for subj in model.of_class(ConceptClass.LEGAL_SUBJECT):
        if subj.id not in mapped and not subj.get("unmapped"):
            out.append(
                Blocker(
                    f"legal subject {subj.id} is neither mapped to a stakeholder "
                    "nor marked unmapped: true",
                    subj.span,
                )
            )
    return out


def _m4(model: ArtifactModel, trace, diagnostics, **_) -> list[Blocker]:
    out = []
    if not model.of_class(ConceptClass.REQUIREMENT):
        out.append(Blocker("no requirement declared"))
    if trace is None:
        out.append(Blocker("trace report was not computed"))
    elif trace.demand_coverage < 1.0:
        out.append(
            Blocker(
                f"demand coverage {trace.demand_coverage:.2f} < 1.0; uncovered: "
                + ", ".join(trace.uncovered_demands)
            )
        )
    # sign-off role findings concern acceptance, not content consistency
    content_errors = [d for d in _errors(diagnostics) if d.code != Code.VAL_ROLE_CONSISTENCY]
    out += _diag_blockers(content_errors)
    return out


_CONTENT_CHECKS = {Milestone.M1: _m1, Milestone.M2: _m2, Milestone.M3: _m3, Milestone.M4: _m4}


def milestone_status(
    model: ArtifactModel,
    applicability: Optional[ApplicabilityResult],
    trace: Optional[TraceReport],
    diagnostics: Sequence[Diagnostic] = (),
) -> MilestoneStatus:
    """Compute M1 to M4.

    ``diagnostics`` are the validator's (and later stages') findings for the
    same model; errors among them block the milestones they concern.
    """
    states: list[MilestoneState] = []
    prev: Optional[MilestoneState] = None
    for ms in Milestone:
        blockers = _CONTENT_CHECKS[ms](
            model, applicability=applicability, trace=trace, diagnostics=diagnostics
        )
        if prev is not None and prev.state is State.NOT_STARTED:
            blockers.insert(0, Blocker(f"{prev.milestone.name} not content complete"))
        if blockers:
            states.append(MilestoneState(ms, State.NOT_STARTED, tuple(blockers)))
            prev = states[-1]
            continue

        missing = [r for r in ACCEPTING_ROLES[ms] if not model.has_signoff(ms, r)]
        blockers = [Blocker(f"missing sign-off {ms.name} by {r.value}") for r in missing]
        if prev is not None and prev.state is not State.ACCEPTED:
            spans = [s.span for s in model.signoffs if s.milestone is ms]
            blockers.insert(0, Blocker(f"{prev.milestone.name} not accepted", spans[0] if spans else None))
        state = State.CONTENT_COMPLETE if blockers else State.ACCEPTED
        states.append(MilestoneState(ms, state, tuple(blockers)))
        prev = states[-1]
    return MilestoneStatus(tuple(states))
