"""Command-line entry point.

    am4rre check FILE...            diagnostics; exit 1 on errors
    am4rre applicability FILE...    per-act verdicts, evidence and priority
    am4rre trace FILE...            derived duties, mapping suggestions, coverage
    am4rre milestones FILE...       M1..M4 states with blocking reasons
    am4rre report FILE... --json P  write the aggregated JSON report
    am4rre fmt FILE                 canonical re-serialization

Several FILEs are read as one project sharing a single namespace.
Exit codes: 0 clean, 1 errors found, 2 usage or I/O problem.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence, TextIO

from . import __version__
from .diagnostics import Diagnostic, Severity
from .pipeline import Analysis, analyze_parsed
from .report import build_report, dumps, effective_diagnostics, exit_code
from .specfmt import ParseResult, merge, parse, serialize

EXIT_OK, EXIT_ERRORS, EXIT_USAGE = 0, 1, 2

_COLORS = {Severity.ERROR: "31", Severity.WARNING: "33", Severity.INFO: "36"}


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(f"{self.prog}: error: {message}")


def _use_color(stream: TextIO) -> bool:
    mode = os.environ.get("AM4RRE_COLOR", "auto").lower()
    if mode == "always":
        return True
    if mode == "never":
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _format_diag(d: Diagnostic, color: bool) -> str:
    where = str(d.span) if d.span else "<model>"
    sev = d.severity.value
    if color:
        sev = f"\033[1;{_COLORS[d.severity]}m{sev}\033[0m"
    return f"{where}: {sev}[{d.code}]: {d.message}"


def _summary(diags: Sequence[Diagnostic]) -> str:
    errors = sum(d.severity is Severity.ERROR for d in diags)
    warnings = sum(d.severity is Severity.WARNING for d in diags)
    return f"{errors} error(s), {warnings} warning(s)"


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "json"), default="human")
    common.add_argument(
        "--no-derived", action="store_true", help="suppress delegation derivation"
    )
    common.add_argument("--strict", action="store_true", help="treat warnings as errors")

    parser = _ArgumentParser(prog="am4rre", description="Check AM4RRE specifications.")
    parser.add_argument("--version", action="version", version=f"am4rre {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    for name, help_text in (
        ("check", "parse, resolve and validate"),
        ("applicability", "infer applicable regulatory acts"),
        ("trace", "delegation consequences, mapping suggestions, coverage"),
        ("milestones", "milestone status"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("files", nargs="+", metavar="FILE")

    rep = sub.add_parser("report", parents=[common], help="write the JSON report")
    rep.add_argument("files", nargs="+", metavar="FILE")
    rep.add_argument("--json", required=True, metavar="PATH", dest="json_path")
    rep.add_argument("--timestamps", action="store_true")

    fmt = sub.add_parser("fmt", help="print canonical form")
    fmt.add_argument("file", metavar="FILE")
    return parser


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"am4rre: cannot read {path}: {exc}") from exc


def _load(paths: Sequence[str]) -> ParseResult:
    texts = [(p, _read(p)) for p in paths]
    return merge([parse(text, name) for name, text in texts])


# --------------------------------------------------------------------------
# human renderings


def _render_applicability(a: Analysis) -> list[str]:
    res = a.applicability
    if res is None:
        return ["applicability not computed: resolve or validation errors present"]
    lines = []
    for v in res.verdicts:
        lines.append(f"{v.act}: {'applicable' if v.applicable else 'not applicable'}")
        for label, evs in (("jurisdiction", v.jurisdiction_evidence), ("field", v.field_evidence)):
            for e in evs:
                lines.append(f"  {label} {e.criterion} matches {e.tag} via {e.instance}")
    lines.append("priority: " + (", ".join(res.priority) if res.priority else "(none)"))
    return lines


def _render_trace(a: Analysis, derive: bool) -> list[str]:
    t = a.trace
    if t is None:
        return ["trace not computed: resolve errors present"]
    lines = []
    if derive:
        lines.append("derived duties:")
        for r in t.derived_relationships:
            lines.append(f"  {r.source} owes_duty_to {r.target} (depth {r.depth})")
        if not t.derived_relationships:
            lines.append("  (none)")
    lines.append("mapping suggestions:")
    for s, k in t.mapping_suggestions:
        lines.append(f"  {s} -> {k}")
    if not t.mapping_suggestions:
        lines.append("  (none)")
    lines.append(
        "unmapped subjects: " + (", ".join(t.unmapped_subjects) if t.unmapped_subjects else "(none)")
    )
    lines.append(f"demand coverage: {t.demand_coverage:.2f}")
    if t.uncovered_demands:
        lines.append("uncovered demands: " + ", ".join(t.uncovered_demands))
    return lines


def _render_milestones(a: Analysis) -> list[str]:
    if a.milestones is None:
        return ["milestones not computed: resolve errors present"]
    lines = []
    for st in a.milestones.states:
        lines.append(f"{st.milestone.name}: {st.state.label}")
        for b in st.blocking_reasons:
            where = f" ({b.span})" if b.span else ""
            lines.append(f"  - {b.reason}{where}")
    return lines


# --------------------------------------------------------------------------


def run(argv: Sequence[str], stdout: TextIO, stderr: TextIO) -> int:
    try:
        args = build_parser().parse_args(list(argv))
    except UsageError as exc:
        print(str(exc), file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    try:
        if args.command == "fmt":
            result = parse(_read(args.file), args.file)
            if result.partial:
                color = _use_color(stderr)
                for d in result.diagnostics:
                    print(_format_diag(d, color), file=stderr)
                return EXIT_ERRORS
            stdout.write(serialize(result.model))
            return EXIT_OK
        parsed = _load(args.files)
    except UsageError as exc:
        print(str(exc), file=stderr)
        return EXIT_USAGE

    derive = not args.no_derived
    analysis = analyze_parsed(parsed, derive=derive)
    diags = effective_diagnostics(analysis, args.strict)
    code = exit_code(diags)

    if args.command == "report":
        doc = build_report(
            analysis, args.files, strict=args.strict, derive=derive, timestamps=args.timestamps
        )
        try:
            with open(args.json_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(dumps(doc))
        except OSError as exc:
            print(f"am4rre: cannot write {args.json_path}: {exc}", file=stderr)
            return EXIT_USAGE
        if args.format == "json":
            stdout.write(dumps({"summary": doc["summary"], "report": args.json_path}))
        else:
            print(f"wrote {args.json_path}: {_summary(diags)}", file=stdout)
        return code

    if args.format == "json":
        doc = build_report(analysis, args.files, strict=args.strict, derive=derive)
        section = {
            "check": (),
            "applicability": ("applicability",),
            "trace": ("trace",),
            "milestones": ("milestones",),
        }[args.command]
        keys = ("schema", "sources", "summary", "diagnostics") + section
        stdout.write(dumps({k: doc[k] for k in keys}))
        return code

    if args.command == "check":
        color = _use_color(stdout)
        for d in diags:
            print(_format_diag(d, color), file=stdout)
        print(_summary(diags), file=stdout)
        return code

    color = _use_color(stderr)
    for d in diags:
        print(_format_diag(d, color), file=stderr)
    render = {
        "applicability": lambda: _render_applicability(analysis),
        "trace": lambda: _render_trace(analysis, derive),
        "milestones": lambda: _render_milestones(analysis),
    }[args.command]
    for line in render():
        print(line, file=stdout)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv, sys.stdout, sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
