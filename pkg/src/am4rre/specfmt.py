"""Reader and writer for the ``.amr`` specification format.

The grammar is block structured and LL(1)::

    act GDPR {
      kind: regulation
      title: "General Data Protection Regulation"
    }
    jurisdiction EU_domestic { criteria: [loc:EU] }
    rel GDPR applies_within EU_domestic
    accept M2 by legal_expert

``#`` starts a comment that runs to the end of the line. The parser never
stops at the first error: after a syntax error it skips ahead to the next
declaration keyword that begins a line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .diagnostics import Code, Diagnostic, SourceSpan, error, has_errors
from .metamodel import (
    TAG_NAMESPACES,
    ArtifactModel,
    ConceptClass,
    ConceptInstance,
    Milestone,
    PropertySpec,
    Relationship,
    RelationshipKind,
    Role,
    SignOff,
    ValueKind,
)

REL_KEYWORD = "rel"
ACCEPT_KEYWORD = "accept"
DECL_KEYWORDS = frozenset(
    [c.keyword for c in ConceptClass] + [REL_KEYWORD, ACCEPT_KEYWORD]
)

# --------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class Token:
    kind: str  # WORD, STRING, '{', '}', '[', ']', ':', ',', EOF, ERROR
    text: str
    line: int
    col: int
    end_col: int
    value: str = ""
    first_on_line: bool = False

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.line, self.col, self.line, self.end_col)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<word>[A-Za-z0-9_][A-Za-z0-9_.\-]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>[{}\[\]:,])
  | (?P<bad_string>"(?:[^"\\\n]|\\.)*)
  | (?P<other>.)
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}
_ESCAPE_RE = re.compile(r"\\(.)")


def _unescape(body: str) -> Optional[str]:
    bad = False

    def sub(m: re.Match) -> str:
        nonlocal bad
        ch = m.group(1)
        if ch not in _ESCAPES:
            bad = True
            return ch
        return _ESCAPES[ch]

    out = _ESCAPE_RE.sub(sub, body)
    return None if bad else out


def tokenize(text: str) -> Iterator[Token]:
    """Split source text into tokens; lexical errors become ERROR tokens."""
    line, line_start = 1, 0
    fresh_line = True
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        start = m.start()
        col = start - line_start + 1
        end_col = col + (m.end() - start)
        if kind == "nl":
            line += 1
            line_start = m.end()
            fresh_line = True
            continue
        if kind in ("ws", "comment"):
            continue
        raw = m.group()
        first = fresh_line
        fresh_line = False
        if kind == "word":
            yield Token("WORD", raw, line, col, end_col, raw, first)
        elif kind == "string":
            value = _unescape(raw[1:-1])
            if value is None:
                yield Token("ERROR", raw, line, col, end_col, "invalid escape sequence", first)
            else:
                yield Token("STRING", raw, line, col, end_col, value, first)
        elif kind == "punct":
            yield Token(raw, raw, line, col, end_col, raw, first)
        elif kind == "bad_string":
            yield Token("ERROR", raw, line, col, end_col, "unterminated string", first)
        else:
            yield Token("ERROR", raw, line, col, end_col, f"unexpected character {raw!r}", first)
    yield Token("EOF", "", line, len(text) - line_start + 1, len(text) - line_start + 1)


# --------------------------------------------------------------------------
# Parser


@dataclass
class ParseResult:
    model: ArtifactModel
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        """True when the model must not be fed to later analyses."""
        return has_errors(self.diagnostics)

    @property
    def ok(self) -> bool:
        return not self.partial


class _Abort(Exception):
    """Raised inside a declaration to trigger recovery."""


class _Parser:
    def __init__(self, text: str, file: str) -> None:
        self.file = file
        self.tokens = list(tokenize(text))
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []
        self.instances: dict[str, ConceptInstance] = {}
        self.relationships: dict[tuple, Relationship] = {}
        self.signoffs: dict[tuple, SignOff] = {}

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def span(self, tok: Token) -> SourceSpan:
        return tok.span(self.file)

    def report(self, code: str, message: str, tok: Token) -> None:
        self.diagnostics.append(error(code, message, self.span(tok)))

    def fail(self, message: str, tok: Optional[Token] = None) -> "_Abort":
        tok = tok or self.tok
        if tok.kind == "ERROR":
            message = f"{tok.value}"
        elif tok.kind == "EOF":
            message = f"{message}, found end of input"
        else:
            message = f"{message}, found {tok.text!r}"
        self.report(Code.PARSE_UNEXPECTED_TOKEN, message, tok)
        return _Abort()

    def _starts_declaration(self) -> bool:
        tok = self.tok
        nxt = self.tokens[self.pos + 1] if self.pos + 1 < len(self.tokens) else tok
        return tok.first_on_line and tok.text in DECL_KEYWORDS and nxt.kind != ":"

    def expect(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            raise self.fail(f"expected {what}")
        return self.advance()

    def expect_word(self, what: str) -> Token:
        return self.expect("WORD", what)

    def recover(self, start: int) -> None:
        if self.pos <= start:
            self.advance()
        while True:
            tok = self.tok
            if tok.kind == "EOF":
                return
            if tok.kind == "WORD" and tok.first_on_line and tok.text in DECL_KEYWORDS:
                return
            self.advance()

    # -- grammar
    def parse(self) -> ParseResult:
        seq = 0
        while self.tok.kind != "EOF":
            tok = self.tok
            start = self.pos
            try:
                if tok.kind == "WORD" and tok.text in DECL_KEYWORDS:
                    if tok.text == REL_KEYWORD:
                        self.rel_decl()
                    elif tok.text == ACCEPT_KEYWORD:
                        self.accept_decl(seq)
                        seq += 1
                    else:
                        self.block_decl(ConceptClass(tok.text))
                else:
                    raise self.fail("expected a declaration keyword")
            except _Abort:
                self.recover(start)
        model = ArtifactModel(
            tuple(self.instances.values()),
            tuple(self.relationships.values()),
            tuple(self.signoffs.values()),
            self.file,
        )
        return ParseResult(model, self.diagnostics)

    def block_decl(self, cls: ConceptClass) -> None:
        head = self.advance()
        ident = self.expect_word(f"an identifier after {cls.keyword!r}")
        self.expect("{", "'{'")
        props: dict[str, object] = {}
        prop_spans: dict[str, SourceSpan] = {}
        while self.tok.kind == "WORD":
            if self._starts_declaration():
                raise self.fail(f"expected '}}' to close {cls.keyword} {ident.text}")
            key = self.advance()
            self.expect(":", f"':' after property {key.text!r}")
            spec = cls.property_spec(key.text)
            if spec is None:
                self.skip_value()
                self.report(
                    Code.PARSE_UNKNOWN_PROPERTY,
                    f"unknown property {key.text!r} for {cls.keyword}",
                    key,
                )
                continue
            start = self.tok
            ok, value = self.value(spec)
            vspan = self.span(start).cover(self.span(self.tokens[self.pos - 1]))
            if key.text in props:
                self.report(
                    Code.PARSE_DUPLICATE_ID,
                    f"duplicate property {key.text!r} in {cls.keyword} {ident.text}",
                    key,
                )
                continue
            if ok:
                props[key.text] = value
                prop_spans[key.text] = vspan
        close = self.expect("}", "a property name or '}'")
        span = self.span(head).cover(self.span(close))
        if ident.text in self.instances:
            self.report(
                Code.PARSE_DUPLICATE_ID,
                f"duplicate identifier {ident.text!r}",
                ident,
            )
            return
        self.instances[ident.text] = ConceptInstance(
            ident.text, cls, props, span, prop_spans
        )

    def skip_value(self) -> None:
        if self.tok.kind in ("STRING", "WORD"):
            self.advance()
        elif self.tok.kind == "[":
            self.raw_tag_list()
        else:
            raise self.fail("expected a value")

    def value(self, spec: PropertySpec) -> tuple[bool, object]:
        tok = self.tok
        kind = spec.kind
        if kind is ValueKind.TAGS:
            if tok.kind != "[":
                raise self.fail(f"expected a tag list for {spec.name!r}")
            return self.tag_list(spec.namespace)
        if tok.kind == "[":
            raise self.fail(f"expected a single value for {spec.name!r}")
        if tok.kind not in ("WORD", "STRING"):
            raise self.fail(f"expected a value for {spec.name!r}")
        self.advance()
        if kind is ValueKind.TEXT:
            return True, tok.value
        if tok.kind != "WORD":
            self.report(
                Code.PARSE_UNEXPECTED_TOKEN,
                f"expected a bare word for {spec.name!r}, found string {tok.text}",
                tok,
            )
            return False, None
        if kind is ValueKind.CHOICE:
            if tok.value not in spec.choices:
                self.report(
                    Code.PARSE_UNEXPECTED_TOKEN,
                    f"invalid value {tok.value!r} for {spec.name!r}; "
                    f"expected one of {', '.join(spec.choices)}",
                    tok,
                )
                return False, None
            return True, tok.value
        if kind is ValueKind.BOOL:
            if tok.value not in ("true", "false"):
                self.report(
                    Code.PARSE_UNEXPECTED_TOKEN,
                    f"invalid value {tok.value!r} for {spec.name!r}; expected true or false",
                    tok,
                )
                return False, None
            return True, tok.value == "true"
        return True, tok.value  # REF

    def raw_tag_list(self) -> list[list[Token]]:
        """Consume ``[ ... ]`` and return comma-separated token groups."""
        self.expect("[", "'['")
        groups: list[list[Token]] = [[]]
        while self.tok.kind not in ("]", "EOF", "{", "}"):
            tok = self.advance()
            if tok.kind == ",":
                groups.append([])
            else:
                groups[-1].append(tok)
        close = self.expect("]", "']'")
        if groups == [[]]:
            raise self.fail("expected at least one tag", close)
        return groups

    def tag_list(self, namespace: Optional[str]) -> tuple[bool, frozenset[str]]:
        groups = self.raw_tag_list()
        tags: set[str] = set()
        ok = True
        for group in groups:
            tag = self.tag(group, namespace)
            if tag is None:
                ok = False
            else:
                tags.add(tag)
        return ok, frozenset(tags)

    def tag(self, group: list[Token], namespace: Optional[str]) -> Optional[str]:
        if not group:
            self.report(Code.PARSE_INVALID_TAG, "empty tag", self.tokens[self.pos - 1])
            return None
        first = group[0]
        shape_ok = (
            len(group) == 3
            and group[0].kind == "WORD"
            and group[1].kind == ":"
            and group[2].kind == "WORD"
            and group[0].line == group[2].line
            and group[0].end_col == group[1].col
            and group[1].end_col == group[2].col
        )
        span = self.span(first).cover(self.span(group[-1]))
        if not shape_ok:
            text = " ".join(t.text for t in group)
            self.diagnostics.append(
                error(
                    Code.PARSE_INVALID_TAG,
                    f"invalid tag {text!r}; expected <namespace>:<name> without spaces",
                    span,
                )
            )
            return None
        ns, name = group[0].text, group[2].text
        if ns not in TAG_NAMESPACES:
            self.diagnostics.append(
                error(
                    Code.PARSE_INVALID_TAG,
                    f"unknown tag namespace {ns!r} in '{ns}:{name}'; "
                    f"expected one of {', '.join(TAG_NAMESPACES)}",
                    span,
                )
            )
            return None
        if namespace is not None and ns != namespace:
            self.diagnostics.append(
                error(
                    Code.PARSE_INVALID_TAG,
                    f"tag '{ns}:{name}' must use namespace {namespace!r}",
                    span,
                )
            )
            return None
        return f"{ns}:{name}"

    def rel_decl(self) -> None:
        head = self.advance()
        src = self.expect_word("a source identifier after 'rel'")
        kw = self.expect_word("a relationship keyword")
        kind = RelationshipKind.from_keyword(kw.text)
        if kind is None:
            raise self.fail(
                "expected a relationship keyword ("
                + ", ".join(k.keyword for k in RelationshipKind)
                + ")",
                kw,
            )
        tgt = self.expect_word(f"a target identifier after {kw.text!r}")
        rel = Relationship(
            kind, src.text, tgt.text, span=self.span(head).cover(self.span(tgt))
        )
        if rel.key in self.relationships:
            self.report(
                Code.PARSE_DUPLICATE_ID,
                f"duplicate relationship '{src.text} {kw.text} {tgt.text}'",
                kw,
            )
            return
        self.relationships[rel.key] = rel

    def accept_decl(self, seq: int) -> None:
        head = self.advance()
        ms = self.expect_word("a milestone (M1..M4)")
        if ms.text not in Milestone.__members__:
            raise self.fail("expected a milestone (M1..M4)", ms)
        by = self.expect_word("'by'")
        if by.text != "by":
            raise self.fail("expected 'by'", by)
        role_tok = self.expect_word("a role")
        try:
            role = Role(role_tok.text)
        except ValueError:
            raise self.fail(
                "expected a role (" + ", ".join(r.value for r in Role) + ")", role_tok
            ) from None
        milestone = Milestone[ms.text]
        key = (milestone, role)
        if key in self.signoffs:
            self.report(
                Code.PARSE_DUPLICATE_ID,
                f"duplicate sign-off {ms.text} by {role.value}",
                ms,
            )
            return
        self.signoffs[key] = SignOff(
            milestone, role, seq, self.span(head).cover(self.span(role_tok))
        )


def parse(text: str, source_name: str = "<input>") -> ParseResult:
    """Parse ``.amr`` source text into an unresolved model plus diagnostics."""
    return _Parser(text, source_name).parse()


def parse_file(path) -> ParseResult:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse(fh.read(), str(path))


def merge(results: Sequence[ParseResult]) -> ParseResult:
    """Combine separately parsed files into one model with a flat namespace.

    Later duplicates of an id, relationship or sign-off are dropped with an
    E-PARSE-002 diagnostic, mirroring the single-file rule.
    """
    if len(results) == 1:
        return results[0]
    diagnostics: list[Diagnostic] = []
    instances: dict[str, ConceptInstance] = {}
    rels: dict[tuple, Relationship] = {}
    signoffs: dict[tuple, SignOff] = {}
    for res in results:
        diagnostics.extend(res.diagnostics)
        m = res.model
        for inst in m.instances:
            if inst.id in instances:
                diagnostics.append(
                    error(
                        Code.PARSE_DUPLICATE_ID,
                        f"duplicate identifier {inst.id!r}",
                        inst.span,
                        related_spans=_spans(instances[inst.id].span),
                    )
                )
            else:
                instances[inst.id] = inst
        for rel in m.relationships:
            rels.setdefault(rel.key, rel)
        for s in m.signoffs:
            key = (s.milestone, s.role)
            if key in signoffs:
                diagnostics.append(
                    error(
                        Code.PARSE_DUPLICATE_ID,
                        f"duplicate sign-off {s.milestone.name} by {s.role.value}",
                        s.span,
                    )
                )
            else:
                signoffs[key] = SignOff(s.milestone, s.role, len(signoffs), s.span)
    name = ", ".join(r.model.source_name for r in results)
    model = ArtifactModel(
        tuple(instances.values()), tuple(rels.values()), tuple(signoffs.values()), name
    )
    return ParseResult(model, diagnostics)


def _spans(span: Optional[SourceSpan]) -> tuple[SourceSpan, ...]:
    return (span,) if span else ()


# --------------------------------------------------------------------------
# Serializer


def _quote(text: str) -> str:
    out = text.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
    return f'"{out}"'


def _format_value(spec: PropertySpec, value: object) -> str:
    if spec.kind is ValueKind.TEXT:
        return _quote(value)  # type: ignore[arg-type]
    if spec.kind is ValueKind.BOOL:
        return "true" if value else "false"
    if spec.kind is ValueKind.TAGS:
        return "[" + ", ".join(sorted(value)) + "]"  # type: ignore[arg-type]
    return str(value)


def serialize(model: ArtifactModel) -> str:
    """Render a model as canonical ``.amr`` text.

    Instances keep their declaration order, followed by declared
    relationships and sign-offs. Derived relationships and empty tag sets are
    omitted; both come back identically on reparse.
    """
    blocks: list[str] = []
    for inst in model.instances:
        lines = [f"{inst.cls.keyword} {inst.id} {{"]
        for spec in inst.cls.properties:
            if spec.name not in inst.properties:
                continue
            value = inst.properties[spec.name]
            if spec.kind is ValueKind.TAGS and not value:
                continue
            lines.append(f"  {spec.name}: {_format_value(spec, value)}")
        lines.append("}")
        blocks.append("\n".join(lines))
    rels = [
        f"rel {r.source} {r.kind.keyword} {r.target}"
        for r in model.relationships
        if not r.derived
    ]
    if rels:
        blocks.append("\n".join(rels))
    accepts = [
        f"accept {s.milestone.name} by {s.role.value}"
        for s in sorted(model.signoffs, key=lambda s: s.sequence)
    ]
    if accepts:
        blocks.append("\n".join(accepts))
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"
