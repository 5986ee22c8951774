"""Name resolution and relationship endpoint checks.

Identifiers live in one flat namespace. Resolution binds every relationship
endpoint and every reference-valued property to a declared instance and
checks the endpoint-class table of each relationship kind.
"""

from __future__ import annotations

from .diagnostics import Code, Diagnostic, error
from .metamodel import ArtifactModel, ValueKind


def resolve(model: ArtifactModel) -> tuple[ArtifactModel, list[Diagnostic]]:
    diagnostics: list[Diagnostic] = []
    index = model.index

    for inst in model.instances:
        for spec in inst.cls.properties:
            if spec.kind is not ValueKind.REF or spec.name not in inst.properties:
                continue
            ref = inst.properties[spec.name]
            if ref not in index:
                diagnostics.append(
                    error(
                        Code.RES_UNKNOWN_ID,
                        f"{inst.cls.keyword} {inst.id}: {spec.name} refers to "
                        f"unknown identifier {ref!r}",
                        inst.property_spans.get(spec.name, inst.span),
                        subject=inst.id,
                    )
                )

    for rel in model.relationships:
        label = f"'{rel.source} {rel.kind.keyword} {rel.target}'"
        missing = [e for e in (rel.source, rel.target) if e not in index]
        for ident in dict.fromkeys(missing):
            diagnostics.append(
                error(
                    Code.RES_UNKNOWN_ID,
                    f"relationship {label} refers to unknown identifier {ident!r}",
                    rel.span,
                    subject=rel.source,
                )
            )
        if rel.kind.irreflexive and rel.source == rel.target:
            diagnostics.append(
                error(
                    Code.RES_ENDPOINT_CLASS,
                    f"{rel.kind.keyword} must relate two distinct subjects: {label}",
                    rel.span,
                    subject=rel.source,
                )
            )
        if missing:
            continue
        src, tgt = index[rel.source], index[rel.target]
        problems = []
        if src.cls not in rel.kind.source_classes:
            problems.append(f"source {src.id} is a {src.cls.keyword}")
        if tgt.cls not in rel.kind.target_classes:
            problems.append(f"target {tgt.id} is a {tgt.cls.keyword}")
        if problems:
            allowed_src = "/".join(sorted(c.keyword for c in rel.kind.source_classes))
            allowed_tgt = "/".join(sorted(c.keyword for c in rel.kind.target_classes))
            diagnostics.append(
                error(
                    Code.RES_ENDPOINT_CLASS,
                    f"{rel.kind.keyword} links {allowed_src} to {allowed_tgt}, but "
                    + " and ".join(problems),
                    rel.span,
                    subject=rel.source,
                )
            )

    if diagnostics:
        return model, diagnostics
    return model.with_(resolved=True), diagnostics
