"""Crypto-agility maturity assessment toolkit.

The package models a five-stage maturity ladder for cryptographic
agility, evaluates assessment sessions against it, scans source trees
for algorithm usage, and exposes the whole thing over a CLI and an HTTP
API. Submodules:

- ``camm.model``: the maturity model, validation, dependency analysis
- ``camm.assessment``: sessions, level computation, gap analysis
- ``camm.inventory``: scanner, knowledge base, policies, Mosca check
- ``camm.report``: report assembly and rendering
- ``camm.cli`` / ``camm.service``: command line and HTTP front ends
"""

__version__ = "1.0.0"

from .model import builtin_model, evaluation_order, load_model, validate_model
from .assessment import (
    achieved_level,
    aggregate_level,
    create_session,
    gap_analysis,
    next_questions,
    set_status,
    what_if,
)
from .inventory import (
    build_inventory,
    check_policy,
    mosca_check,
    scan_tree,
    select_opportunistic,
)
from .report import build_report, render_report

__all__ = [
    "__version__",
    "builtin_model",
    "load_model",
    "validate_model",
    "evaluation_order",
    "create_session",
    "set_status",
    "achieved_level",
    "aggregate_level",
    "gap_analysis",
    "what_if",
    "next_questions",
    "scan_tree",
    "build_inventory",
    "check_policy",
    "select_opportunistic",
    "mosca_check",
    "build_report",
    "render_report",
]
