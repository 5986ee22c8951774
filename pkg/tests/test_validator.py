import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from am4rre import analyze, check, parse, resolve
from am4rre.applicability import compute_applicability
from am4rre.diagnostics import Code, Severity
from am4rre.metamodel import ConceptClass, ConceptInstance, RelationshipKind

from helpers import MUTATIONS, mutate


def validate(text):
    res = parse(text)
    assert res.ok, res.diagnostics
    model, diags = resolve(res.model)
    assert not diags, diags
    return check(model)


def test_fixture_clean(gdpr_model):
    assert check(gdpr_model) == []
    assert check(gdpr_model, compute_applicability(gdpr_model)) == []


def test_requires_resolved_model(gdpr_text):
    with pytest.raises(ValueError):
        check(parse(gdpr_text).model)


def test_v2_vacuous():
    assert validate("subject A { person: natural }\nsubject B { person: legal }\n") == []


def test_v3_person_type():
    diags = validate(
        "subject data_subject { person: natural delegatory_role: obligee }\n"
        "stakeholder Acme { person: legal }\n"
        "rel data_subject maps_to Acme\n"
    )
    assert [d.code for d in diags] == [Code.VAL_PERSON_TYPE]
    assert diags[0].severity is Severity.ERROR


@pytest.mark.parametrize(
    "subject, stakeholder, ok",
    [
        ("natural", "natural", True),
        ("natural", "legal", False),
        ("legal", "legal", True),
        ("legal", "natural", False),
        ("any", "natural", True),
        ("any", "legal", True),
    ],
)
def test_v3_table(subject, stakeholder, ok):
    diags = validate(
        f"subject S {{ person: {subject} }}\nstakeholder K {{ person: {stakeholder} }}\nrel S maps_to K\n"
    )
    assert (diags == []) is ok


def test_v4_reversed(gdpr_text):
    text = mutate(
        gdpr_text,
        "rel EDPB_07_2020 ensures_consistent_application_of GDPR",
        "rel GDPR ensures_consistent_application_of EDPB_07_2020",
    )
    diags = validate(text)
    assert [d.code for d in diags] == [Code.VAL_FORCE_DIRECTION]
    assert diags[0].subject == "GDPR"


def test_v5_roles():
    diags = validate(
        "accept M1 by legal_expert\naccept M2 by domain_expert\naccept M4 by requirements_engineer\n"
    )
    assert [d.code for d in diags] == [Code.VAL_ROLE_CONSISTENCY]


def test_v6_only_when_referenced():
    assert validate("jurisdiction J { }\n") == []
    diags = validate("act A { kind: law }\njurisdiction J { }\nrel A applies_within J\n")
    assert [d.code for d in diags] == [Code.VAL_EMPTY_CRITERIA]


def test_v7_warning_when_inapplicable():
    text = (
        "act A { kind: law }\n"
        "jurisdiction J { criteria: [loc:EU] }\nfield F { criteria: [intent:x] }\n"
        "rel A applies_within J\nrel A belongs_to_field F\n"
        'demand D { text: "t" source_act: A }\n'
    )
    model, _ = resolve(parse(text).model)
    app = compute_applicability(model)
    assert not app.is_applicable("A")
    diags = check(model, app)
    assert [(d.code, d.severity) for d in diags] == [(Code.VAL_DEMAND_PROVENANCE, Severity.WARNING)]
    assert check(model) == []


@pytest.mark.parametrize("name, old, new, expected", MUTATIONS, ids=[m[0] for m in MUTATIONS])
def test_mutation(gdpr_text, name, old, new, expected):
    analysis = analyze(mutate(gdpr_text, old, new))
    assert sorted(d.code for d in analysis.diagnostics) == sorted(expected)


def test_v2_soundness_by_deletion(gdpr_text):
    triad = [
        "rel data_controller owes_duty_to data_subject\n",
        "rel data_controller delegates_to data_processor\n",
    ]
    for line in triad:
        diags = analyze(mutate(gdpr_text, line, "")).diagnostics
        assert [d.code for d in diags] == [Code.VAL_DELEGATION_TRIAD]


def test_delegation_chain_is_v2_clean():
    diags = validate(
        "subject O { person: natural delegatory_role: obligee }\n"
        "subject A { person: any delegatory_role: delegator }\n"
        "subject B { person: any delegatory_role: delegatee }\n"
        "subject C { person: any delegatory_role: delegatee }\n"
        "rel A owes_duty_to O\nrel A delegates_to B\nrel B delegates_to C\n"
    )
    assert diags == []


def test_order_independent(gdpr_model):
    rng = random.Random(7)
    broken = gdpr_model.with_(
        relationships=tuple(
            r for r in gdpr_model.relationships if r.kind is not RelationshipKind.DELEGATES_TO
        )
    )
    expected = sorted(d.code for d in check(broken))
    assert expected == [Code.VAL_DELEGATION_TRIAD]
    for _ in range(20):
        inst = list(broken.instances)
        rels = list(broken.relationships)
        rng.shuffle(inst)
        rng.shuffle(rels)
        shuffled = broken.with_(instances=tuple(inst), relationships=tuple(rels))
        assert check(shuffled) == check(broken)


@settings(max_examples=60, deadline=None)
@given(
    cls=st.sampled_from(list(ConceptClass)),
    mutation=st.sampled_from(MUTATIONS),
)
def test_adding_isolated_instance_is_monotone(gdpr_text, cls, mutation):
    _, old, new, _ = mutation
    model, diags = resolve(parse(mutate(gdpr_text, old, new)).model)
    if diags:
        return
    before = check(model)
    props = {}
    for spec in cls.properties:
        if spec.required:
            props[spec.name] = spec.choices[0] if spec.choices else "GDPR" if spec.ref_class else "x"
    extra = ConceptInstance("ZZ_isolated", cls, props)
    after = check(model.with_(instances=model.instances + (extra,)))
    remaining = list(after)
    for d in before:
        assert d in remaining
        remaining.remove(d)
