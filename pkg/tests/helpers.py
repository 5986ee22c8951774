"""Brute-force oracles and random model generators for the test suite.

The oracles read model fields directly and never call into the engine
modules they check.
"""

from __future__ import annotations

import itertools
import random
import string
from importlib.resources import files

from am4rre.metamodel import (
    ACT_KINDS,
    ArtifactModel,
    ConceptClass,
    ConceptInstance,
    Milestone,
    Relationship,
    RelationshipKind,
    Role,
    SignOff,
    ValueKind,
)

FIXTURE_NAME = "gdpr_example.amr"
FULL_FIXTURE_NAME = "gdpr_full.amr"


def fixture_text(name: str = FIXTURE_NAME) -> str:
    return (files("am4rre") / "data" / name).read_text("utf-8")


def fixture_path(name: str = FIXTURE_NAME) -> str:
    return str(files("am4rre") / "data" / name)


# --------------------------------------------------------------------------
# applicability oracle

RANK = {"law": 0, "regulation": 1, "directive": 2, "decision": 3, "guideline": 4, "recommendation": 5}


def applicability_oracle(model: ArtifactModel) -> dict:
    """Enumerate every (act, link, context instance, tag) combination."""
    pool = set()
    for inst in model.instances:
        for v in inst.properties.values():
            if isinstance(v, frozenset):
                pool |= v
    acts = [i for i in model.instances if i.cls is ConceptClass.REGULATORY_ACT]
    verdicts = {}
    for act in acts:
        jur, fld = set(), set()
        for rel in model.relationships:
            if rel.source != act.id:
                continue
            if rel.kind is RelationshipKind.APPLIES_WITHIN:
                sources = {ConceptClass.STAKEHOLDER: "location", ConceptClass.DOMAIN_MODEL: "processor_location"}
                out = jur
            elif rel.kind is RelationshipKind.BELONGS_TO_FIELD:
                sources = {ConceptClass.STATEMENT_OF_INTENT: "intents"}
                out = fld
            else:
                continue
            crit = next(i for i in model.instances if i.id == rel.target)
            criteria = crit.properties.get("criteria", frozenset())
            for inst in model.instances:
                if inst.cls not in sources:
                    continue
                carried = inst.properties.get(sources[inst.cls], frozenset())
                for tag in pool:
                    if tag in criteria and tag in carried:
                        out.add((rel.target, tag, inst.id))
        verdicts[act.id] = (bool(jur) and bool(fld), sorted(jur), sorted(fld))
    applicable = [a for a in acts if verdicts[a.id][0]]
    order = {a.id: n for n, a in enumerate(acts)}
    priority = sorted((a.id for a in applicable), key=lambda i: (RANK[next(a for a in acts if a.id == i).properties["kind"]], order[i]))
    return {"verdicts": verdicts, "priority": priority}


def engine_view(result) -> dict:
    verdicts = {
        v.act: (
            v.applicable,
            [(e.criterion, e.tag, e.instance) for e in v.jurisdiction_evidence],
            [(e.criterion, e.tag, e.instance) for e in v.field_evidence],
        )
        for v in result.verdicts
    }
    return {"verdicts": verdicts, "priority": list(result.priority)}


TAG_NAMES = ("a", "b", "c", "d", "e", "f")


def random_applicability_model(rng: random.Random) -> ArtifactModel:
    """≤10 acts, ≤5 jurisdictions, ≤5 fields, ≤10 context instances,
    tags drawn from a 6-name pool."""

    def tags(ns: str) -> frozenset:
        return frozenset(f"{ns}:{n}" for n in rng.sample(TAG_NAMES, rng.randint(0, 3)))

    instances = []
    n_acts = rng.randint(0, 10)
    acts = [f"A{i}" for i in range(n_acts)]
    jurs = [f"J{i}" for i in range(rng.randint(0, 5))]
    flds = [f"F{i}" for i in range(rng.randint(0, 5))]
    for a in acts:
        instances.append(ConceptInstance(a, ConceptClass.REGULATORY_ACT, {"kind": rng.choice(ACT_KINDS)}))
    for j in jurs:
        instances.append(ConceptInstance(j, ConceptClass.JURISDICTION, {"criteria": tags("loc")}))
    for f in flds:
        instances.append(ConceptInstance(f, ConceptClass.FIELD_OF_LAW, {"criteria": tags("intent")}))
    for n in range(rng.randint(0, 10)):
        kind = rng.randrange(3)
        if kind == 0:
            instances.append(
                ConceptInstance(
                    f"S{n}", ConceptClass.STAKEHOLDER,
                    {"person": rng.choice(("natural", "legal")), "location": tags("loc")},
                )
            )
        elif kind == 1:
            instances.append(
                ConceptInstance(f"D{n}", ConceptClass.DOMAIN_MODEL, {"processor_location": tags("loc")})
            )
        else:
            instances.append(
                ConceptInstance(f"I{n}", ConceptClass.STATEMENT_OF_INTENT, {"intents": tags("intent")})
            )
    rels = []
    for a in acts:
        for j in jurs:
            if rng.random() < 0.35:
                rels.append(Relationship(RelationshipKind.APPLIES_WITHIN, a, j))
        for f in flds:
            if rng.random() < 0.35:
                rels.append(Relationship(RelationshipKind.BELONGS_TO_FIELD, a, f))
    kinds = {i.id: i.properties["kind"] for i in instances if i.cls is ConceptClass.REGULATORY_ACT}
    for x, y in itertools.permutations(acts, 2):
        # only weaker -> stronger, as a validated model would have
        if RANK[kinds[x]] > RANK[kinds[y]] and rng.random() < 0.2:
            rels.append(Relationship(RelationshipKind.ENSURES_CONSISTENT_APPLICATION_OF, x, y))
    rng.shuffle(instances)
    rng.shuffle(rels)
    return ArtifactModel.build(instances, rels)


# --------------------------------------------------------------------------
# delegation closure oracle


def closure_oracle(n: int, delegates: set, owes: set) -> tuple[set, set]:
    """Warshall closure over node indices.

    Returns (derived owes-duty pairs, cycle members)."""
    reach = [[(i, j) in delegates for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    cyclic = {i for i in range(n) if reach[i][i]}
    derived = set()
    for d, o in owes:
        for e in range(n):
            if reach[d][e] and e not in cyclic and e != o and (e, o) not in owes:
                derived.add((e, o))
    return derived, cyclic


def delegation_model(n: int, delegates: set, owes: set) -> ArtifactModel:
    subjects = [
        ConceptInstance(f"P{i}", ConceptClass.LEGAL_SUBJECT, {"person": "any"}) for i in range(n)
    ]
    rels = [Relationship(RelationshipKind.DELEGATES_TO, f"P{a}", f"P{b}") for a, b in sorted(delegates)]
    rels += [Relationship(RelationshipKind.OWES_DUTY_TO, f"P{a}", f"P{b}") for a, b in sorted(owes)]
    return ArtifactModel.build(subjects, rels)


def random_delegation_case(rng: random.Random, max_n: int = 8):
    n = rng.randint(1, max_n)
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    p = rng.choice((0.1, 0.2, 0.35))
    delegates = {e for e in pairs if rng.random() < p}
    owes = {e for e in pairs if rng.random() < p}
    return n, delegates, owes


# --------------------------------------------------------------------------
# arbitrary well-typed models for the round trip

_IDENT_START = string.ascii_letters + string.digits + "_"
_IDENT_REST = _IDENT_START + ".-"


def random_ident(rng: random.Random) -> str:
    return rng.choice(_IDENT_START) + "".join(
        rng.choice(_IDENT_REST) for _ in range(rng.randint(0, 8))
    )


def random_text(rng: random.Random) -> str:
    alphabet = string.ascii_letters + ' "\\\t\n#{}[]:,äé€'
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 20)))


def _random_value(rng: random.Random, spec, ids: list[str]):
    if spec.kind is ValueKind.TEXT:
        return random_text(rng)
    if spec.kind is ValueKind.CHOICE:
        return rng.choice(spec.choices)
    if spec.kind is ValueKind.BOOL:
        return rng.random() < 0.5
    if spec.kind is ValueKind.REF:
        return rng.choice(ids) if ids and rng.random() < 0.8 else random_ident(rng)
    return frozenset(
        f"{spec.namespace}:{random_ident(rng)}" for _ in range(rng.randint(0, 3))
    )


def random_model(rng: random.Random, max_instances: int = 12) -> ArtifactModel:
    ids: list[str] = []
    while len(ids) < rng.randint(0, max_instances):
        ident = random_ident(rng)
        if ident not in ids:
            ids.append(ident)
    instances = []
    for ident in ids:
        cls = rng.choice(list(ConceptClass))
        props = {}
        for spec in cls.properties:
            if spec.required or rng.random() < 0.5:
                props[spec.name] = _random_value(rng, spec, ids)
        instances.append(ConceptInstance(ident, cls, props))
    rels = {}
    for _ in range(rng.randint(0, 10)):
        pick = lambda: rng.choice(ids) if ids and rng.random() < 0.9 else random_ident(rng)  # noqa: E731
        r = Relationship(rng.choice(list(RelationshipKind)), pick(), pick())
        rels.setdefault(r.key, r)
    pairs = [(m, r) for m in Milestone for r in Role]
    chosen = rng.sample(pairs, rng.randint(0, len(pairs)))
    signoffs = [SignOff(m, r, n) for n, (m, r) in enumerate(chosen)]
    return ArtifactModel.build(instances, rels.values(), signoffs)


# --------------------------------------------------------------------------
# single-edit mutations of the clean fixture: (name, old, new, expected codes)

MUTATIONS = [
    ("delete delegates_to",
     "rel data_controller delegates_to data_processor\n", "", ["E-VAL-002"]),
    ("delete owes_duty_to",
     "rel data_controller owes_duty_to data_subject\n", "", ["E-VAL-002"]),
    ("flip stakeholder person natural->legal",
     "stakeholder Alice {\n  person: natural", "stakeholder Alice {\n  person: legal", ["E-VAL-003"]),
    ("flip data subject person natural->legal",
     "subject data_subject {\n  person: natural", "subject data_subject {\n  person: legal", ["E-VAL-003"]),
    ("narrow controller person any->natural",
     "subject data_controller {\n  person: any", "subject data_controller {\n  person: natural", ["E-VAL-003"]),
    ("reverse force relationship",
     "rel EDPB_07_2020 ensures_consistent_application_of GDPR",
     "rel GDPR ensures_consistent_application_of EDPB_07_2020", ["E-VAL-004"]),
    ("equal force on consistency link",
     "kind: guideline", "kind: regulation", ["E-VAL-004"]),
    ("empty jurisdiction criteria",
     "jurisdiction EU_domestic {\n  criteria: [loc:EU]\n}", "jurisdiction EU_domestic {\n}", ["E-VAL-006"]),
    ("empty field criteria",
     "field personal_data_protection {\n  criteria: [intent:process-personal-data]\n}",
     "field personal_data_protection {\n}", ["E-VAL-006"]),
    ("dangling maps_to target",
     "rel data_subject maps_to Alice\n", "rel data_subject maps_to Alice\nrel data_subject maps_to Bob\n",
     ["E-RES-001"]),
    ("dangling source_act",
     "  source_act: GDPR\n}\n\ndemand processor_contract", "  source_act: GDPR_2016\n}\n\ndemand processor_contract",
     ["E-RES-001"]),
    ("self duty on an act",
     "rel GDPR issued_by EU_legislator\n", "rel GDPR issued_by EU_legislator\nrel GDPR owes_duty_to GDPR\n",
     ["E-RES-002", "E-RES-002"]),
    ("sign-off by wrong role",
     "accept M1 by requirements_engineer\n", "accept M1 by requirements_engineer\naccept M3 by domain_expert\n",
     ["E-VAL-005"]),
    ("demand sourced from a jurisdiction",
     "  source_act: GDPR\n}\n\ndemand processor_contract", "  source_act: EU_domestic\n}\n\ndemand processor_contract",
     ["E-VAL-007"]),
    ("missing act kind",
     "act EDPB_07_2020 {\n  kind: guideline\n", "act EDPB_07_2020 {\n", ["E-VAL-001"]),
    ("act without field link",
     "rel EDPB_07_2020 belongs_to_field personal_data_protection\n", "", ["E-APP-001"]),
    ("processor loses delegatee role",
     "  delegatory_role: delegatee\n", "  delegatory_role: none\n", ["E-VAL-002", "E-VAL-002"]),
]


def mutate(text: str, old: str, new: str) -> str:
    assert text.count(old) == 1, f"mutation anchor not unique: {old!r}"
    return text.replace(old, new)
