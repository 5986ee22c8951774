"""Which regulatory acts apply to the project, and in what order.

An act applies when both hold:

* some jurisdiction it ``applies_within`` shares a ``loc:`` tag with the
  union of stakeholder locations and domain-model processor locations;
* some field of law it ``belongs_to_field`` shares an ``intent:`` tag with
  the union of statement-of-intent tags.

Matching is OR: one shared tag is enough. Every matching
(criterion, tag, context instance) triple is kept as evidence.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .diagnostics import Code, Diagnostic, warning
from .metamodel import (
    ArtifactModel,
    ConceptClass,
    FORCE_RANK,
    RelationshipKind,
)

# context classes and the tag property each contributes
JURISDICTION_SOURCES = (
    (ConceptClass.STAKEHOLDER, "location"),
    (ConceptClass.DOMAIN_MODEL, "processor_location"),
)
FIELD_SOURCES = ((ConceptClass.STATEMENT_OF_INTENT, "intents"),)


@dataclass(frozen=True, order=True)
class Evidence:
    criterion: str  # jurisdiction or field-of-law id
    tag: str
    instance: str  # context instance carrying the tag

    def to_dict(self) -> dict:
        return {"criterion": self.criterion, "tag": self.tag, "instance": self.instance}


@dataclass(frozen=True)
class ActVerdict:
    act: str
    applicable: bool
    jurisdiction_evidence: tuple[Evidence, ...] = ()
    field_evidence: tuple[Evidence, ...] = ()

    def to_dict(self) -> dict:
        return {
            "act": self.act,
            "applicable": self.applicable,
            "jurisdiction_evidence": [e.to_dict() for e in self.jurisdiction_evidence],
            "field_evidence": [e.to_dict() for e in self.field_evidence],
        }


@dataclass(frozen=True)
class ApplicabilityResult:
    verdicts: tuple[ActVerdict, ...]
    priority: tuple[str, ...] = ()
    diagnostics: tuple[Diagnostic, ...] = ()

    def __getitem__(self, act: str) -> ActVerdict:
        for v in self.verdicts:
            if v.act == act:
                return v
        raise KeyError(act)

    def is_applicable(self, act: str) -> bool:
        return any(v.act == act and v.applicable for v in self.verdicts)

    @property
    def applicable(self) -> tuple[str, ...]:
        return tuple(v.act for v in self.verdicts if v.applicable)

    def to_dict(self) -> dict:
        return {
            "acts": [v.to_dict() for v in self.verdicts],
            "priority": list(self.priority),
        }


def _tag_index(
    model: ArtifactModel, sources: Iterable[tuple[ConceptClass, str]]
) -> Mapping[str, list[str]]:
    """tag -> context instance ids carrying it, in declaration order."""
    index: dict[str, list[str]] = defaultdict(list)
    for inst in model.instances:
        for cls, prop in sources:
            if inst.cls is cls:
                for tag in inst.tags(prop):
                    index[tag].append(inst.id)
    return index


def _match(model, act_id, kind, tag_index) -> tuple[Evidence, ...]:
    found = set()
    for rel in model.relations(kind, source=act_id):
        criteria = model[rel.target].tags("criteria")
        for tag in criteria & tag_index.keys():
            for inst in tag_index[tag]:
                found.add(Evidence(rel.target, tag, inst))
    return tuple(sorted(found))


def compute_applicability(model: ArtifactModel) -> ApplicabilityResult:
    """Evaluate every regulatory act against the project context."""
    loc_index = _tag_index(model, JURISDICTION_SOURCES)
    intent_index = _tag_index(model, FIELD_SOURCES)
    verdicts = []
    diagnostics = []
    for act in model.of_class(ConceptClass.REGULATORY_ACT):
        for kind, what in (
            (RelationshipKind.APPLIES_WITHIN, "applies_within"),
            (RelationshipKind.BELONGS_TO_FIELD, "belongs_to_field"),
        ):
            if next(model.relations(kind, source=act.id), None) is None:
                diagnostics.append(
                    warning(
                        Code.APP_MISSING_LINK,
                        f"act {act.id} has no {what} link; treated as not applicable",
                        act.span,
                        subject=act.id,
                    )
                )
        jur = _match(model, act.id, RelationshipKind.APPLIES_WITHIN, loc_index)
        fld = _match(model, act.id, RelationshipKind.BELONGS_TO_FIELD, intent_index)
        verdicts.append(ActVerdict(act.id, bool(jur and fld), jur, fld))
    partial = ApplicabilityResult(tuple(verdicts), (), tuple(diagnostics))
    return ApplicabilityResult(
        partial.verdicts, tuple(priority_order(partial, model)), partial.diagnostics
    )


def priority_order(result: ApplicabilityResult, model: ArtifactModel) -> list[str]:
    """Order applicable acts for processing, strongest force first.

    Within one force rank, an act that ensures consistent application of
    another follows it directly; anything still tied keeps declaration order.
    """
    applicable = set(result.applicable)
    acts = [a for a in model.of_class(ConceptClass.REGULATORY_ACT) if a.id in applicable]
    groups: dict[int, list[str]] = defaultdict(list)
    for act in acts:
        groups[FORCE_RANK[act.get("kind")]].append(act.id)  # type: ignore[index]

    out: list[str] = []
    for rank in sorted(groups):
        members = groups[rank]
        in_group = set(members)
        supporters: dict[str, list[str]] = defaultdict(list)
        supports: set[str] = set()
        for m in members:
            for rel in model.relations(
                RelationshipKind.ENSURES_CONSISTENT_APPLICATION_OF, source=m
            ):
                if rel.target in in_group and rel.target != m:
                    supporters[rel.target].append(m)
                    supports.add(m)
        placed: set[str] = set()

        def place(act_id: str) -> None:
            if act_id in placed:
                return
            placed.add(act_id)
            out.append(act_id)
            for s in supporters[act_id]:
                place(s)

        for m in members:
            if m not in supports:
                place(m)
        for m in members:  # only reached through cycles
            place(m)
    return out
