"""Interpretation support: delegation consequences, subject-to-stakeholder
mapping suggestions and demand-to-requirement coverage.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .diagnostics import Code, Diagnostic, error
from .metamodel import ArtifactModel, ConceptClass, Relationship, RelationshipKind
from .validator import person_satisfies

OWES = RelationshipKind.OWES_DUTY_TO
DELEGATES = RelationshipKind.DELEGATES_TO


@dataclass(frozen=True)
class TraceReport:
    derived_relationships: tuple[Relationship, ...] = ()
    mapping_suggestions: tuple[tuple[str, str], ...] = ()
    unmapped_subjects: tuple[str, ...] = ()
    demand_coverage: float = 1.0
    uncovered_demands: tuple[str, ...] = ()
    diagnostics: tuple[Diagnostic, ...] = ()

    def to_dict(self, include_derived: bool = True) -> dict:
        derived = self.derived_relationships if include_derived else ()
        return {
            "derived_relationships": [
                {
                    "kind": r.kind.keyword,
                    "source": r.source,
                    "target": r.target,
                    "depth": r.depth,
                }
                for r in derived
            ],
            "mapping_suggestions": [
                {"subject": s, "stakeholder": k} for s, k in self.mapping_suggestions
            ],
            "unmapped_subjects": list(self.unmapped_subjects),
            "demand_coverage": self.demand_coverage,
            "uncovered_demands": list(self.uncovered_demands),
        }


def delegation_cycles(model: ArtifactModel) -> list[list[str]]:
    """Strongly connected components of the delegates_to graph that contain
    a cycle, each listed in declaration order."""
    succ: dict[str, list[str]] = {}
    for rel in model.relations(DELEGATES):
        succ.setdefault(rel.source, []).append(rel.target)
        succ.setdefault(rel.target, [])

    # iterative Tarjan
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comps: list[list[str]] = []
    counter = 0
    for root in succ:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(succ[nxt])))
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[node])
                if low[node] == index[node]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == node:
                            break
                    if len(comp) > 1 or node in succ[node]:
                        comps.append(comp)
    order = model.order
    comps = [sorted(c, key=lambda i: order.get(i, len(order))) for c in comps]
    return sorted(comps, key=lambda c: order.get(c[0], len(order)))


def _cycle_diagnostics(model: ArtifactModel, cycles: list[list[str]]) -> list[Diagnostic]:
    out = []
    for comp in cycles:
        members = set(comp)
        rels = [r for r in model.relations(DELEGATES) if r.source in members and r.target in members]
        span = rels[0].span if rels else None
        out.append(
            error(
                Code.INT_DELEGATION_CYCLE,
                "delegation cycle among " + ", ".join(comp)
                + "; duties are not propagated to these subjects",
                span,
                related_spans=tuple(r.span for r in rels[1:] if r.span),
                subject=comp[0],
            )
        )
    return out


def _expand(model: ArtifactModel, cycles: list[list[str]]) -> list[Relationship]:
    blocked = {m for comp in cycles for m in comp}
    succ: dict[str, list[str]] = {}
    for rel in model.relations(DELEGATES):
        succ.setdefault(rel.source, []).append(rel.target)
    declared = {(r.source, r.target) for r in model.relations(OWES)}

    derived: dict[tuple[str, str], int] = {}
    for duty in model.relations(OWES):
        # breadth first so the recorded depth is the shortest chain
        seen = {duty.source}
        queue = deque((t, 1) for t in succ.get(duty.source, ()))
        while queue:
            node, depth = queue.popleft()
            if node in seen:
                continue
            seen.add(node)
            key = (node, duty.target)
            if node not in blocked and node != duty.target and key not in declared:
                if key not in derived or depth < derived[key]:
                    derived[key] = depth
            queue.extend((t, depth + 1) for t in succ.get(node, ()))

    order = model.order
    return [
        Relationship(OWES, s, t, derived=True, depth=d)
        for (s, t), d in sorted(
            derived.items(), key=lambda kv: (order.get(kv[0][0], 0), order.get(kv[0][1], 0))
        )
    ]


def expand_delegations(model: ArtifactModel) -> list[Relationship]:
    """Derive the duties delegatees take over from their delegators.

    For ``D owes_duty_to O`` and a delegation chain ``D -> E1 -> ... -> Ek``
    every ``Ei owes_duty_to O`` not already declared is derived, with
    ``depth`` set to the chain length. Subjects on a delegation cycle receive
    no derived duties; see :func:`delegation_cycles`.
    """
    return _expand(model, delegation_cycles(model))


def suggest_mappings(model: ArtifactModel) -> list[tuple[str, str]]:
    """Candidate (legal subject, stakeholder) pairs for unmapped subjects."""
    mapped = {r.source for r in model.relations(RelationshipKind.MAPS_TO)}
    stakeholders = model.of_class(ConceptClass.STAKEHOLDER)
    out = []
    for subj in model.of_class(ConceptClass.LEGAL_SUBJECT):
        if subj.id in mapped:
            continue
        person = subj.get("person")
        if person is None:
            continue
        for st in stakeholders:
            sp = st.get("person")
            if sp is not None and person_satisfies(person, sp):  # type: ignore[arg-type]
                out.append((subj.id, st.id))
    return out


def coverage(model: ArtifactModel, derive: bool = True) -> TraceReport:
    """Build the trace report: demand coverage plus the interpretation aids.

    A demand counts as covered once any requirement is ``derived_from`` it.
    With no demands at all coverage is 1.0.
    """
    cycles = delegation_cycles(model)
    demands = model.of_class(ConceptClass.REGULATORY_DEMAND)
    covered = {r.target for r in model.relations(RelationshipKind.DERIVED_FROM)}
    uncovered = tuple(d.id for d in demands if d.id not in covered)
    ratio = 1.0 if not demands else (len(demands) - len(uncovered)) / len(demands)
    mapped = {r.source for r in model.relations(RelationshipKind.MAPS_TO)}
    unmapped = tuple(
        s.id for s in model.of_class(ConceptClass.LEGAL_SUBJECT) if s.id not in mapped
    )
    return TraceReport(
        derived_relationships=tuple(_expand(model, cycles)) if derive else (),
        mapping_suggestions=tuple(suggest_mappings(model)),
        unmapped_subjects=unmapped,
        demand_coverage=ratio,
        uncovered_demands=uncovered,
        diagnostics=tuple(_cycle_diagnostics(model, cycles)),
    )
