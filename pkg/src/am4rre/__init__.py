"""Layered specifications for regulatory requirements engineering.

Write regulatory acts, legal concepts and project context in ``.amr`` files,
then check them, infer which acts apply, derive delegation consequences,
trace demands to requirements and compute milestone status.
"""

from .applicability import ApplicabilityResult, compute_applicability, priority_order
from .diagnostics import Diagnostic, Severity, SourceSpan
from .interpretation import TraceReport, coverage, expand_delegations, suggest_mappings
from .metamodel import (
    ArtifactModel,
    ConceptClass,
    ConceptInstance,
    Layer,
    Milestone,
    Relationship,
    RelationshipKind,
    Role,
    SignOff,
    force_rank,
    layer_of,
    responsible_role,
)
from .milestones import MilestoneStatus, State, milestone_status
from .pipeline import Analysis, analyze, analyze_model
from .resolver import resolve
from .specfmt import ParseResult, parse, parse_file, serialize
from .validator import check

__version__ = "0.1.0"
