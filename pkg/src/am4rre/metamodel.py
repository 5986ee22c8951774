"""In-memory artifact model: layers, roles, milestones, concept classes,
instances, relationships and sign-offs.

All model values are immutable once built. Property values are plain Python
values: ``str`` for text, choices and references, ``bool`` for flags and
``frozenset[str]`` for tag sets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional, Union

from .diagnostics import SourceSpan


class Layer(Enum):
    REGULATORY_CONTEXT = "regulatory_context"
    REGULATORY_DEMANDS = "regulatory_demands"
    CONTEXT = "context"
    REQUIREMENTS = "requirements"
    SYSTEM = "system"


class Role(Enum):
    REQUIREMENTS_ENGINEER = "requirements_engineer"
    LEGAL_EXPERT = "legal_expert"
    DOMAIN_EXPERT = "domain_expert"


class Milestone(Enum):
    M1 = 1
    M2 = 2
    M3 = 3
    M4 = 4

    def __lt__(self, other: "Milestone") -> bool:
        if not isinstance(other, Milestone):
            return NotImplemented
        return self.value < other.value

    @property
    def predecessor(self) -> Optional["Milestone"]:
        return Milestone(self.value - 1) if self.value > 1 else None


MILESTONE_TITLES = {
    Milestone.M1: "Project Scope defined",
    Milestone.M2: "Regulatory Context Specification accepted",
    Milestone.M3: "Regulatory Demands Specification accepted",
    Milestone.M4: "Requirements Specification accepted",
}

# Roles whose sign-off accepts a milestone. All listed roles must sign.
ACCEPTING_ROLES: Mapping[Milestone, tuple[Role, ...]] = MappingProxyType(
    {
        Milestone.M1: (Role.REQUIREMENTS_ENGINEER,),
        Milestone.M2: (Role.LEGAL_EXPERT, Role.DOMAIN_EXPERT),
        Milestone.M3: (Role.LEGAL_EXPERT,),
        Milestone.M4: (Role.REQUIREMENTS_ENGINEER,),
    }
)


class ConceptClass(Enum):
    """Content-model classes; the value is the declaration keyword."""

    REGULATORY_ACT = "act"
    JURISDICTION = "jurisdiction"
    FIELD_OF_LAW = "field"
    REGULATOR = "regulator"
    LEGAL_SUBJECT = "subject"
    REGULATORY_DEMAND = "demand"
    PROJECT_SCOPE = "scope"
    STAKEHOLDER = "stakeholder"
    DOMAIN_MODEL = "domain_model"
    STATEMENT_OF_INTENT = "intent"
    REQUIREMENT = "requirement"
    SYSTEM_ELEMENT = "system"

    @property
    def keyword(self) -> str:
        return self.value

    @property
    def layer(self) -> Layer:
        return _LAYERS[self]

    @property
    def responsible_role(self) -> Role:
        return _ROLES[self]

    @property
    def co_responsible_roles(self) -> tuple[Role, ...]:
        if self.layer is Layer.REGULATORY_CONTEXT:
            return (Role.DOMAIN_EXPERT,)
        return ()

    @property
    def properties(self) -> tuple["PropertySpec", ...]:
        return _PROPERTIES[self]

    def property_spec(self, name: str) -> Optional["PropertySpec"]:
        for spec in _PROPERTIES[self]:
            if spec.name == name:
                return spec
        return None

    @classmethod
    def from_keyword(cls, word: str) -> Optional["ConceptClass"]:
        try:
            return cls(word)
        except ValueError:
            return None


_LAYERS = {
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

_LAYER_ROLE = {
    Layer.REGULATORY_CONTEXT: Role.LEGAL_EXPERT,
    Layer.REGULATORY_DEMANDS: Role.LEGAL_EXPERT,
    Layer.CONTEXT: Role.DOMAIN_EXPERT,
    Layer.REQUIREMENTS: Role.REQUIREMENTS_ENGINEER,
    Layer.SYSTEM: Role.REQUIREMENTS_ENGINEER,
}

_ROLES = {cls: _LAYER_ROLE[layer] for cls, layer in _LAYERS.items()}


def layer_of(cls: ConceptClass) -> Layer:
    return cls.layer


def responsible_role(cls: ConceptClass) -> Role:
    return cls.responsible_role


# Lower rank = higher force. Only regulation < guideline is sourced; the rest
# of the order is a fixed convention so priority output is deterministic.
FORCE_RANK: Mapping[str, int] = MappingProxyType(
    {
        "law": 0,
        "regulation": 1,
        "directive": 2,
        "decision": 3,
        "guideline": 4,
        "recommendation": 5,
    }
)
ACT_KINDS = tuple(FORCE_RANK)


def force_rank(kind: str) -> int:
    """Return the force rank of a regulatory-act kind (0 is strongest)."""
    try:
        return FORCE_RANK[kind]
    except KeyError:
        raise ValueError(f"unknown regulatory act kind {kind!r}") from None


# --------------------------------------------------------------------------
# Properties

TAG_NAMESPACES = ("loc", "intent", "data")
_WORD = r"[A-Za-z0-9_][A-Za-z0-9_.\-]*"
TAG_RE = re.compile(rf"(?P<ns>{_WORD}):(?P<name>{_WORD})")
WORD_RE = re.compile(_WORD)


class ValueKind(Enum):
    TEXT = "text"
    CHOICE = "choice"
    TAGS = "tags"
    REF = "ref"
    BOOL = "bool"


@dataclass(frozen=True)
class PropertySpec:
    name: str
    kind: ValueKind
    required: bool = False
    choices: tuple[str, ...] = ()
    namespace: Optional[str] = None
    ref_class: Optional[ConceptClass] = None
    default: object = None

    def check(self, value: object) -> None:
        """Raise ``ValueError`` if ``value`` is not valid for this property."""
        kind = self.kind
        if kind is ValueKind.TEXT:
            if not isinstance(value, str):
                raise ValueError(f"{self.name}: expected text, got {value!r}")
        elif kind is ValueKind.CHOICE:
            if value not in self.choices:
                raise ValueError(
                    f"{self.name}: expected one of {', '.join(self.choices)}, got {value!r}"
                )
        elif kind is ValueKind.REF:
            if not isinstance(value, str) or not WORD_RE.fullmatch(value):
                raise ValueError(f"{self.name}: expected identifier, got {value!r}")
        elif kind is ValueKind.BOOL:
            if not isinstance(value, bool):
                raise ValueError(f"{self.name}: expected true or false, got {value!r}")
        elif kind is ValueKind.TAGS:
            if not isinstance(value, frozenset):
                raise ValueError(f"{self.name}: expected a tag set, got {value!r}")
            for tag in value:
                check_tag(tag, self.namespace)


def check_tag(tag: object, namespace: Optional[str] = None) -> None:
    if not isinstance(tag, str):
        raise ValueError(f"tag must be a string, got {tag!r}")
    m = TAG_RE.fullmatch(tag)
    if m is None:
        raise ValueError(f"malformed tag {tag!r}; expected <namespace>:<name>")
    if m["ns"] not in TAG_NAMESPACES:
        raise ValueError(f"unknown tag namespace {m['ns']!r} in {tag!r}")
    if namespace is not None and m["ns"] != namespace:
        raise ValueError(f"tag {tag!r} not in namespace {namespace!r}")


def _text(name, required=False):
    return PropertySpec(name, ValueKind.TEXT, required)


def _choice(name, choices, required=False, default=None):
    return PropertySpec(name, ValueKind.CHOICE, required, choices=choices, default=default)


def _tags(name, namespace):
    return PropertySpec(name, ValueKind.TAGS, namespace=namespace, default=frozenset())


PERSON_TYPES = ("natural", "legal")
SUBJECT_PERSON_TYPES = ("natural", "legal", "any")
DELEGATORY_ROLES = ("delegator", "delegatee", "obligee", "none")
REQUIREMENT_KINDS = ("functional", "nonfunctional")

_PROPERTIES: dict[ConceptClass, tuple[PropertySpec, ...]] = {
    ConceptClass.REGULATORY_ACT: (
        _choice("kind", ACT_KINDS, required=True),
        _text("title"),
    ),
    ConceptClass.JURISDICTION: (_tags("criteria", "loc"),),
    ConceptClass.FIELD_OF_LAW: (_tags("criteria", "intent"),),
    ConceptClass.REGULATOR: (_text("name"),),
    ConceptClass.LEGAL_SUBJECT: (
        _choice("person", SUBJECT_PERSON_TYPES, required=True),
        _choice("delegatory_role", DELEGATORY_ROLES, default="none"),
        PropertySpec("unmapped", ValueKind.BOOL, default=False),
    ),
    ConceptClass.REGULATORY_DEMAND: (
        _text("text", required=True),
        PropertySpec(
            "source_act",
            ValueKind.REF,
            required=True,
            ref_class=ConceptClass.REGULATORY_ACT,
        ),
    ),
    ConceptClass.PROJECT_SCOPE: (_text("description"),),
    ConceptClass.STAKEHOLDER: (
        _choice("person", PERSON_TYPES, required=True),
        _tags("location", "loc"),
    ),
    ConceptClass.DOMAIN_MODEL: (
        _tags("processor_location", "loc"),
        _tags("data_categories", "data"),
    ),
    ConceptClass.STATEMENT_OF_INTENT: (_tags("intents", "intent"),),
    ConceptClass.REQUIREMENT: (
        _text("text", required=True),
        _choice("kind", REQUIREMENT_KINDS, required=True),
    ),
    ConceptClass.SYSTEM_ELEMENT: (_text("text", required=True),),
}

# property supplying the human-readable name, when set
_LABEL_PROPERTY = {
    ConceptClass.REGULATORY_ACT: "title",
    ConceptClass.REGULATOR: "name",
}

PropertyValue = Union[str, bool, frozenset]


# --------------------------------------------------------------------------
# Relationships


class RelationshipKind(Enum):
    ENSURES_CONSISTENT_APPLICATION_OF = "ensures_consistent_application_of"
    APPLIES_WITHIN = "applies_within"
    BELONGS_TO_FIELD = "belongs_to_field"
    ISSUED_BY = "issued_by"
    OWES_DUTY_TO = "owes_duty_to"
    DELEGATES_TO = "delegates_to"
    MAPS_TO = "maps_to"
    DERIVED_FROM = "derived_from"
    CONTAINS = "contains"

    @property
    def keyword(self) -> str:
        return self.value

    @property
    def source_classes(self) -> frozenset[ConceptClass]:
        return _ENDPOINTS[self][0]

    @property
    def target_classes(self) -> frozenset[ConceptClass]:
        return _ENDPOINTS[self][1]

    @property
    def irreflexive(self) -> bool:
        return self in (RelationshipKind.OWES_DUTY_TO, RelationshipKind.DELEGATES_TO)

    @classmethod
    def from_keyword(cls, word: str) -> Optional["RelationshipKind"]:
        try:
            return cls(word)
        except ValueError:
            return None


_C = ConceptClass
_ENDPOINTS = {
    RelationshipKind.ENSURES_CONSISTENT_APPLICATION_OF: (
        frozenset({_C.REGULATORY_ACT}),
        frozenset({_C.REGULATORY_ACT}),
    ),
    RelationshipKind.APPLIES_WITHIN: (
        frozenset({_C.REGULATORY_ACT}),
        frozenset({_C.JURISDICTION}),
    ),
    RelationshipKind.BELONGS_TO_FIELD: (
        frozenset({_C.REGULATORY_ACT}),
        frozenset({_C.FIELD_OF_LAW}),
    ),
    RelationshipKind.ISSUED_BY: (
        frozenset({_C.REGULATORY_ACT}),
        frozenset({_C.REGULATOR}),
    ),
    RelationshipKind.OWES_DUTY_TO: (
        frozenset({_C.LEGAL_SUBJECT}),
        frozenset({_C.LEGAL_SUBJECT}),
    ),
    RelationshipKind.DELEGATES_TO: (
        frozenset({_C.LEGAL_SUBJECT}),
        frozenset({_C.LEGAL_SUBJECT}),
    ),
    RelationshipKind.MAPS_TO: (
        frozenset({_C.LEGAL_SUBJECT}),
        frozenset({_C.STAKEHOLDER}),
    ),
    RelationshipKind.DERIVED_FROM: (
        frozenset({_C.REQUIREMENT}),
        frozenset({_C.REGULATORY_DEMAND}),
    ),
    RelationshipKind.CONTAINS: (
        frozenset({_C.REGULATORY_ACT}),
        frozenset({_C.LEGAL_SUBJECT, _C.REGULATORY_DEMAND}),
    ),
}
del _C


# --------------------------------------------------------------------------
# Model values


def _freeze(props: Mapping[str, PropertyValue]) -> Mapping[str, PropertyValue]:
    return MappingProxyType(
        {k: frozenset(v) if isinstance(v, (set, list, tuple)) else v for k, v in props.items()}
    )


@dataclass(frozen=True)
class ConceptInstance:
    id: str
    cls: ConceptClass
    properties: Mapping[str, PropertyValue] = field(default_factory=dict)
    span: Optional[SourceSpan] = field(default=None, compare=False)
    property_spans: Mapping[str, SourceSpan] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        if not WORD_RE.fullmatch(self.id):
            raise ValueError(f"invalid identifier {self.id!r}")
        props = _freeze(self.properties)
        for name, value in props.items():
            spec = self.cls.property_spec(name)
            if spec is None:
                raise ValueError(
                    f"{self.cls.keyword} {self.id}: unknown property {name!r}"
                )
            spec.check(value)
        # an empty tag set is the default; store it as absent
        props = MappingProxyType(
            {k: v for k, v in props.items() if not (isinstance(v, frozenset) and not v)}
        )
        object.__setattr__(self, "properties", props)
        object.__setattr__(self, "property_spans", MappingProxyType(dict(self.property_spans)))

    @property
    def layer(self) -> Layer:
        return self.cls.layer

    @property
    def display_name(self) -> str:
        label = _LABEL_PROPERTY.get(self.cls)
        if label and self.properties.get(label):
            return self.properties[label]  # type: ignore[return-value]
        return self.id

    def get(self, name: str) -> Optional[PropertyValue]:
        """Property value, falling back to the class default."""
        if name in self.properties:
            return self.properties[name]
        spec = self.cls.property_spec(name)
        if spec is None:
            raise KeyError(f"{self.cls.keyword} has no property {name!r}")
        return spec.default

    def tags(self, name: str) -> frozenset[str]:
        value = self.get(name)
        return value if isinstance(value, frozenset) else frozenset()

    def missing_required(self) -> list[str]:
        return [p.name for p in self.cls.properties if p.required and p.name not in self.properties]


@dataclass(frozen=True)
class Relationship:
    kind: RelationshipKind
    source: str
    target: str
    derived: bool = False
    span: Optional[SourceSpan] = field(default=None, compare=False)
    # delegation hops behind a derived relationship; 0 for declared ones
    depth: int = field(default=0, compare=False)

    @property
    def id(self) -> str:
        return f"{self.source}.{self.kind.keyword}.{self.target}"

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.source, self.kind.value, self.target)


@dataclass(frozen=True)
class SignOff:
    milestone: Milestone
    role: Role
    sequence: int = 0
    span: Optional[SourceSpan] = field(default=None, compare=False)


@dataclass(frozen=True)
class ArtifactModel:
    instances: tuple[ConceptInstance, ...] = ()
    relationships: tuple[Relationship, ...] = ()
    signoffs: tuple[SignOff, ...] = ()
    source_name: str = field(default="<input>", compare=False)
    resolved: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(self, "relationships", tuple(self.relationships))
        object.__setattr__(self, "signoffs", tuple(self.signoffs))
        seen: set[str] = set()
        for inst in self.instances:
            if inst.id in seen:
                raise ValueError(f"duplicate instance id {inst.id!r}")
            seen.add(inst.id)

    @cached_property
    def index(self) -> Mapping[str, ConceptInstance]:
        return MappingProxyType({i.id: i for i in self.instances})

    @cached_property
    def order(self) -> Mapping[str, int]:
        """Declaration position of each instance."""
        return MappingProxyType({i.id: n for n, i in enumerate(self.instances)})

    def get(self, ident: str) -> Optional[ConceptInstance]:
        return self.index.get(ident)

    def __getitem__(self, ident: str) -> ConceptInstance:
        return self.index[ident]

    def __contains__(self, ident: object) -> bool:
        return ident in self.index

    def of_class(self, cls: ConceptClass) -> list[ConceptInstance]:
        return [i for i in self.instances if i.cls is cls]

    def in_layer(self, layer: Layer) -> list[ConceptInstance]:
        return [i for i in self.instances if i.layer is layer]

    def relations(
        self,
        kind: Optional[RelationshipKind] = None,
        source: Optional[str] = None,
        target: Optional[str] = None,
    ) -> Iterator[Relationship]:
        for r in self.relationships:
            if kind is not None and r.kind is not kind:
                continue
            if source is not None and r.source != source:
                continue
            if target is not None and r.target != target:
                continue
            yield r

    def has_signoff(self, milestone: Milestone, role: Role) -> bool:
        return any(s.milestone is milestone and s.role is role for s in self.signoffs)

    def with_(self, **changes) -> "ArtifactModel":
        fields = dict(
            instances=self.instances,
            relationships=self.relationships,
            signoffs=self.signoffs,
            source_name=self.source_name,
            resolved=self.resolved,
        )
        fields.update(changes)
        return ArtifactModel(**fields)

    @classmethod
    def build(
        cls,
        instances: Iterable[ConceptInstance] = (),
        relationships: Iterable[Relationship] = (),
        signoffs: Iterable[SignOff] = (),
        source_name: str = "<input>",
    ) -> "ArtifactModel":
        return cls(tuple(instances), tuple(relationships), tuple(signoffs), source_name)
