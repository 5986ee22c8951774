"""Well-formedness rules over a resolved model.

=====  ===========  ====================================================
Rule   Code         Checks
=====  ===========  ====================================================
V1     E-VAL-001    instance matches its class blueprint (layer, required
                    properties)
V2     E-VAL-002    delegation triad: delegator -> delegatee and
                    delegator -> obligee, with matching roles
V3     E-VAL-003    maps_to respects the legal subject's person type
V4     E-VAL-004    ensures_consistent_application_of runs from the weaker
                    act to the stronger one
V5     E-VAL-005    sign-offs come from an accepting role
V6     E-VAL-006    referenced jurisdictions / fields have criteria
V7     E-VAL-007    demand source act is an act (warning if inapplicable)
=====  ===========  ====================================================
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Callable, Iterator, Optional

from .diagnostics import Code, Diagnostic, canonical, error, warning
from .metamodel import (
    ACCEPTING_ROLES,
    ArtifactModel,
    ConceptClass,
    ConceptInstance,
    FORCE_RANK,
    Layer,
    RelationshipKind,
)

if TYPE_CHECKING:
    from .applicability import ApplicabilityResult

RULE_CODES = {
    "V1": Code.VAL_LAYER_CONFORMANCE,
    "V2": Code.VAL_DELEGATION_TRIAD,
    "V3": Code.VAL_PERSON_TYPE,
    "V4": Code.VAL_FORCE_DIRECTION,
    "V5": Code.VAL_ROLE_CONSISTENCY,
    "V6": Code.VAL_EMPTY_CRITERIA,
    "V7": Code.VAL_DEMAND_PROVENANCE,
}

_EXPECTED_LAYER = {
    ConceptClass.REGULATORY_ACT: Layer.REGULATORY_CONTEXT,
    ConceptClass.JURISDICTION: Layer.REGULATORY_CONTEXT,
    ConceptClass.FIELD_OF_LAW: Layer.REGULATORY_CONTEXT,
    ConceptClass.REGULATOR: Layer.REGULATORY_CONTEXT,
    ConceptClass.LEGAL_SUBJECT: Layer.REGULATORY_DEMANDS,
    ConceptClass.REGULATORY_DEMAND: Layer.REGULATORY_DEMANDS,
    ConceptClass.PROJECT_SCOPE: Layer.CONTEXT,
    ConceptClass.STAKEHOLDER: Layer.CONTEXT,
    ConceptClass.DOMAIN_MODEL: Layer.CONTEXT,
    ConceptClass.STATEMENT_OF_INTENT: Layer.CONTEXT,
    ConceptClass.REQUIREMENT: Layer.REQUIREMENTS,
    ConceptClass.SYSTEM_ELEMENT: Layer.SYSTEM,
}

# person type of a legal subject -> stakeholder person types it admits
PERSON_ADMITS = {
    "natural": frozenset({"natural"}),
    "legal": frozenset({"legal"}),
    "any": frozenset({"natural", "legal"}),
}


def person_satisfies(subject_person: str, stakeholder_person: str) -> bool:
    return stakeholder_person in PERSON_ADMITS.get(subject_person, frozenset())


def _role(inst: ConceptInstance) -> str:
    return inst.get("delegatory_role")  # type: ignore[return-value]


def check_layers(model: ArtifactModel) -> Iterator[Diagnostic]:
    for inst in model.instances:
        if inst.layer is not _EXPECTED_LAYER[inst.cls]:
            yield error(
                Code.VAL_LAYER_CONFORMANCE,
                f"{inst.cls.keyword} {inst.id} is placed on layer "
                f"{inst.layer.value}, expected {_EXPECTED_LAYER[inst.cls].value}",
                inst.span,
                subject=inst.id,
            )
        for name in inst.missing_required():
            yield error(
                Code.VAL_LAYER_CONFORMANCE,
                f"{inst.cls.keyword} {inst.id} is missing required property {name!r}",
                inst.span,
                subject=inst.id,
            )


def check_delegation(model: ArtifactModel) -> Iterator[Diagnostic]:
    idx = model.index
    for subj in model.of_class(ConceptClass.LEGAL_SUBJECT):
        if _role(subj) != "delegator":
            continue
        delegatees = [
            r for r in model.relations(RelationshipKind.DELEGATES_TO, source=subj.id)
            if _role(idx[r.target]) == "delegatee"
        ]
        obligees = [
            r for r in model.relations(RelationshipKind.OWES_DUTY_TO, source=subj.id)
            if _role(idx[r.target]) == "obligee"
        ]
        if not delegatees:
            yield error(
                Code.VAL_DELEGATION_TRIAD,
                f"delegator {subj.id} has no delegates_to link to a delegatee",
                subj.span,
                subject=subj.id,
            )
        if not obligees:
            yield error(
                Code.VAL_DELEGATION_TRIAD,
                f"delegator {subj.id} has no owes_duty_to link to an obligee",
                subj.span,
                subject=subj.id,
            )

    # delegatees may delegate further; chains are expanded downstream
    allowed = {
        RelationshipKind.DELEGATES_TO: ({"delegator", "delegatee"}, {"delegatee"}),
        RelationshipKind.OWES_DUTY_TO: ({"delegator", "delegatee"}, {"obligee"}),
    }
    for rel in model.relationships:
        if rel.kind not in allowed:
            continue
        src_ok, tgt_ok = allowed[rel.kind]
        src, tgt = idx[rel.source], idx[rel.target]
        bad = []
        if _role(src) not in src_ok:
            bad.append(f"source {src.id} has delegatory_role {_role(src)}")
        if _role(tgt) not in tgt_ok:
            bad.append(f"target {tgt.id} has delegatory_role {_role(tgt)}")
        if bad:
            yield error(
                Code.VAL_DELEGATION_TRIAD,
                f"{rel.kind.keyword} expects {'/'.join(sorted(src_ok))} -> "
                f"{'/'.join(sorted(tgt_ok))}, but " + " and ".join(bad),
                rel.span,
                subject=rel.source,
            )


def check_person_types(model: ArtifactModel) -> Iterator[Diagnostic]:
    for rel in model.relations(RelationshipKind.MAPS_TO):
        subj, stake = model[rel.source], model[rel.target]
        sp, kp = subj.get("person"), stake.get("person")
        if sp is None or kp is None:
            continue  # reported by V1
        if not person_satisfies(sp, kp):  # type: ignore[arg-type]
            yield error(
                Code.VAL_PERSON_TYPE,
                f"legal subject {subj.id} (person: {sp}) cannot map to stakeholder "
                f"{stake.id} (person: {kp})",
                rel.span,
                related_spans=tuple(s for s in (stake.span,) if s),
                subject=subj.id,
            )


def check_force_direction(model: ArtifactModel) -> Iterator[Diagnostic]:
    for rel in model.relations(RelationshipKind.ENSURES_CONSISTENT_APPLICATION_OF):
        src, tgt = model[rel.source], model[rel.target]
        sk, tk = src.get("kind"), tgt.get("kind")
        if sk is None or tk is None:
            continue
        if not FORCE_RANK[sk] > FORCE_RANK[tk]:
            yield error(
                Code.VAL_FORCE_DIRECTION,
                f"{src.id} ({sk}) cannot ensure consistent application of "
                f"{tgt.id} ({tk}): the supporting act must have lower force",
                rel.span,
                subject=src.id,
            )


def check_signoff_roles(model: ArtifactModel) -> Iterator[Diagnostic]:
    for s in model.signoffs:
        roles = ACCEPTING_ROLES[s.milestone]
        if s.role not in roles:
            yield error(
                Code.VAL_ROLE_CONSISTENCY,
                f"{s.role.value} cannot accept {s.milestone.name}; expected "
                + " and ".join(r.value for r in roles),
                s.span,
            )


def check_criteria(model: ArtifactModel) -> Iterator[Diagnostic]:
    refs: dict[str, list] = {}
    for rel in model.relationships:
        if rel.kind in (RelationshipKind.APPLIES_WITHIN, RelationshipKind.BELONGS_TO_FIELD):
            refs.setdefault(rel.target, []).append(rel)
    for ident, rels in refs.items():
        inst = model[ident]
        if not inst.tags("criteria"):
            yield error(
                Code.VAL_EMPTY_CRITERIA,
                f"{inst.cls.keyword} {inst.id} is referenced by "
                + ", ".join(sorted({r.source for r in rels}))
                + " but has no criteria",
                inst.span,
                related_spans=tuple(r.span for r in rels if r.span),
                subject=inst.id,
            )


def check_demands(
    model: ArtifactModel, applicability: Optional["ApplicabilityResult"] = None
) -> Iterator[Diagnostic]:
    for demand in model.of_class(ConceptClass.REGULATORY_DEMAND):
        ref = demand.get("source_act")
        if ref is None:
            continue
        span = demand.property_spans.get("source_act", demand.span)
        act = model.get(ref)  # type: ignore[arg-type]
        if act is None or act.cls is not ConceptClass.REGULATORY_ACT:
            what = "undeclared" if act is None else f"a {act.cls.keyword}"
            yield error(
                Code.VAL_DEMAND_PROVENANCE,
                f"demand {demand.id}: source_act {ref} is {what}, not an act",
                span,
                subject=demand.id,
            )
        elif applicability is not None and not applicability.is_applicable(act.id):
            yield warning(
                Code.VAL_DEMAND_PROVENANCE,
                f"demand {demand.id}: source act {act.id} is not applicable to this project",
                span,
                subject=demand.id,
            )


RULES: tuple[Callable[[ArtifactModel], Iterator[Diagnostic]], ...] = (
    check_layers,
    check_delegation,
    check_person_types,
    check_force_direction,
    check_signoff_roles,
    check_criteria,
)


def check(
    model: ArtifactModel, applicability: Optional["ApplicabilityResult"] = None
) -> list[Diagnostic]:
    """Run rules V1 to V7 and return their findings in canonical order.

    V7's applicability warning is only produced when ``applicability`` is
    supplied; without it the rule only checks that the source act exists.
    """
    if not model.resolved:
        raise ValueError("check() requires a resolved model")
    found: list[Diagnostic] = []
    for rule in RULES:
        found.extend(rule(model))
    found.extend(check_demands(model, applicability))
    return canonical(found)
