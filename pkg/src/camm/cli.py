"""Command-line surface.

Exit codes: 0 success, 1 domain failure (the tool worked, compliance did
not), 2 usage or IO error. Machine output goes to stdout as canonical
JSON; diagnostics go to stderr, so pipelines can gate on the payload.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from . import assessment, inventory, report
from .errors import (
    CammError,
    DataFormatError,
    EmptyInputError,
    EmptySubjectError,
    InvalidAnnotationError,
    InvalidEvidenceError,
    InvalidStatusError,
    InvalidTargetError,
    MissingJustificationError,
    ModelFormatError,
    ScanError,
    SessionFormatError,
    UnknownRequirementError,
    UnsupportedFormatError,
)
from .jsonutil import canonical_json
from .model import (
    builtin_model,
    dependency_graph,
    detect_cycles,
    load_model,
    validate_model,
)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

DEFAULT_DATA_DIR = "./camm-data"

# errors that mean the invocation or an input file was bad
_USAGE_ERRORS = (
    ModelFormatError,
    SessionFormatError,
    DataFormatError,
    ScanError,
    UnknownRequirementError,
    MissingJustificationError,
    EmptySubjectError,
    EmptyInputError,
    InvalidTargetError,
    InvalidStatusError,
    InvalidEvidenceError,
    InvalidAnnotationError,
    UnsupportedFormatError,
)


def _emit(doc: dict, out: Optional[str] = None) -> None:
    text = canonical_json(doc)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _diag(message: str) -> None:
    print(f"camm: {message}", file=sys.stderr)


def _read_json(path: str, what: str) -> object:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(
            f"{what} {path!r} is not valid JSON: {exc.msg}",
            details={"line": exc.lineno, "column": exc.colno},
        ) from exc


def _read_session(path: str) -> assessment.AssessmentSession:
    doc = _read_json(path, "session file")
    if not isinstance(doc, dict):
        raise SessionFormatError(f"session file {path!r} must hold a JSON object")
    return assessment.session_from_doc(doc, builtin_model())


def _write_session(session: assessment.AssessmentSession, path: str) -> None:
    Path(path).write_text(
        canonical_json(assessment.session_to_doc(session)), encoding="utf-8"
    )


def _cmd_model_validate(args: argparse.Namespace) -> int:
    if args.file:
        model = load_model(Path(args.file).read_text(encoding="utf-8"))
    else:
        model = builtin_model()
    result = validate_model(model)
    _emit(result.to_doc())
    return EXIT_OK if result.ok else EXIT_DOMAIN


def _cmd_model_graph(args: argparse.Namespace) -> int:
    graph = dependency_graph(builtin_model())
    doc: dict = {
        "nodes": list(graph.nodes),
        "edges": [[req, dep] for req, dep in graph.edges],
        "edge_count": graph.edge_count,
    }
    if args.cycles:
        doc["cycles"] = [list(component) for component in detect_cycles(graph)]
    _emit(doc)
    return EXIT_OK


def _cmd_assess_init(args: argparse.Namespace) -> int:
    session = assessment.create_session(builtin_model(), args.subject)
    _emit(assessment.session_to_doc(session), args.out)
    if args.out:
        _diag(f"created session {session.session_id} at {args.out}")
    return EXIT_OK


def _parse_evidence(specs: list[str], immutable: bool) -> list[assessment.EvidenceItem]:
    items = []
    for spec in specs:
        kind, sep, payload = spec.partition(":")
        if not sep or not kind:
            raise InvalidEvidenceError(
                f"evidence must look like kind:payload, got {spec!r}"
            )
        items.append(assessment.evidence_item(kind, payload, immutable=immutable))
    return items


def _cmd_assess_set(args: argparse.Namespace) -> int:
    session = _read_session(args.session)
    evidence = _parse_evidence(args.evidence or [], args.immutable)
    assessment.set_status(
        session,
        args.req,
        args.status,
        justification=args.justification,
        evidence=evidence,
    )
    _write_session(session, args.session)
    _diag(f"{args.req} -> {args.status} (revision {session.revision})")
    return EXIT_OK


def _cmd_assess_level(args: argparse.Namespace) -> int:
    session = _read_session(args.session)
    _emit(assessment.level_report_doc(session))
    return EXIT_OK


def _cmd_assess_gap(args: argparse.Namespace) -> int:
    session = _read_session(args.session)
    plan = assessment.gap_analysis(session, args.target)
    _emit(plan.to_doc())
    return EXIT_OK


def _cmd_scan(args: argparse.Namespace) -> int:
    ruleset = None
    if args.ruleset:
        ruleset = inventory.load_ruleset(Path(args.ruleset).read_text(encoding="utf-8"))
    result = inventory.scan_tree(args.root, ruleset, max_file_bytes=args.max_file_bytes)
    for warning in result.warnings:
        _diag(f"warning: {warning}")
    doc = {"root": args.root, **result.to_doc()}
    _emit(doc, args.out)
    if args.out:
        _diag(f"{len(result.findings)} findings written to {args.out}")
    return EXIT_OK


def _load_kb_arg(path: Optional[str]) -> inventory.KnowledgeBase:
    if path:
        return inventory.load_kb(Path(path).read_text(encoding="utf-8"))
    return inventory.builtin_kb()


def _cmd_inventory_build(args: argparse.Namespace) -> int:
    result = inventory.findings_from_doc(_read_json(args.findings, "findings file"))
    built = inventory.build_inventory(result.findings, _load_kb_arg(args.kb))
    _emit(built.to_doc(), args.out)
    return EXIT_OK


def _cmd_inventory_check_policy(args: argparse.Namespace) -> int:
    built = inventory.inventory_from_doc(_read_json(args.inventory, "inventory file"))
    if args.policy:
        policy = inventory.load_policy(Path(args.policy).read_text(encoding="utf-8"))
    else:
        policy = inventory.default_policy()
    violations = inventory.check_policy(built, policy)
    _emit(
        {
            "policy": policy.name,
            "ok": not violations,
            "violations": [violation.to_doc() for violation in violations],
        }
    )
    return EXIT_OK if not violations else EXIT_DOMAIN


def _cmd_mosca(args: argparse.Namespace) -> int:
    try:
        params = inventory.MoscaParameters(x=args.x, y=args.y, z=args.z)
    except ValueError as exc:
        _diag(f"error: {exc}")
        return EXIT_USAGE
    passed, margin = inventory.mosca_check(params)
    _emit(
        {
            "passed": passed,
            "margin": margin,
            "x": params.x,
            "y": params.y,
            "z": params.z,
        }
    )
    return EXIT_OK if passed else EXIT_DOMAIN


def _cmd_report(args: argparse.Namespace) -> int:
    session = _read_session(args.session)
    built_inventory = None
    if args.inventory:
        built_inventory = inventory.inventory_from_doc(
            _read_json(args.inventory, "inventory file")
        )
    assembled = report.build_report(
        session, gap_target=args.target, inventory=built_inventory
    )
    data = report.render_report(assembled, args.format)
    if args.out:
        Path(args.out).write_bytes(data)
        _diag(f"report written to {args.out}")
    else:
        sys.stdout.write(data.decode("utf-8"))
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    host, sep, port_text = args.addr.rpartition(":")
    if not sep or not host or not port_text.isdigit():
        _diag(f"error: --addr must look like HOST:PORT, got {args.addr!r}")
        return EXIT_USAGE
    data_dir = args.data or os.environ.get("CAMM_DATA_DIR") or DEFAULT_DATA_DIR

    import uvicorn

    from .service import create_app

    app = create_app(data_dir, ui_dir=args.ui)
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    except OSError as exc:
        _diag(f"error: cannot bind {args.addr}: {exc}")
        return EXIT_USAGE
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="camm",
        description="Crypto-agility maturity assessment toolkit",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    model_cmd = commands.add_parser("model", help="inspect the maturity model")
    model_sub = model_cmd.add_subparsers(dest="subcommand", required=True)
    validate_cmd = model_sub.add_parser("validate", help="validate a model document")
    validate_cmd.add_argument("--file", help="model JSON file (default: builtin model)")
    validate_cmd.set_defaults(handler=_cmd_model_validate)
    graph_cmd = model_sub.add_parser("graph", help="dump the dependency graph")
    graph_cmd.add_argument("--cycles", action="store_true", help="include SCCs of size 2+")
    graph_cmd.set_defaults(handler=_cmd_model_graph)

    assess_cmd = commands.add_parser("assess", help="manage assessment sessions")
    assess_sub = assess_cmd.add_subparsers(dest="subcommand", required=True)
    init_cmd = assess_sub.add_parser("init", help="create a session")
    init_cmd.add_argument("--subject", required=True, help="system under assessment")
    init_cmd.add_argument("--out", help="write the session file here instead of stdout")
    init_cmd.set_defaults(handler=_cmd_assess_init)
    set_cmd = assess_sub.add_parser("set", help="record a requirement status")
    set_cmd.add_argument("--session", required=True, help="session JSON file")
    set_cmd.add_argument("--req", required=True, help="requirement ID, e.g. R10")
    set_cmd.add_argument(
        "--status",
        required=True,
        choices=[status.value for status in assessment.Status],
    )
    set_cmd.add_argument("--justification", help="required for not_applicable")
    set_cmd.add_argument(
        "--evidence",
        action="append",
        metavar="KIND:PAYLOAD",
        help="attach evidence (kinds: "
        + ", ".join(kind.value for kind in assessment.EvidenceKind)
        + "); repeatable",
    )
    set_cmd.add_argument(
        "--immutable",
        action="store_true",
        help="mark the attached evidence as an unfixable constraint",
    )
    set_cmd.set_defaults(handler=_cmd_assess_set)
    level_cmd = assess_sub.add_parser("level", help="compute the maturity level")
    level_cmd.add_argument("--session", required=True)
    level_cmd.set_defaults(handler=_cmd_assess_level)
    gap_cmd = assess_sub.add_parser("gap", help="list requirements missing for a target")
    gap_cmd.add_argument("--session", required=True)
    gap_cmd.add_argument("--target", required=True, type=int, help="target level 1..4")
    gap_cmd.set_defaults(handler=_cmd_assess_gap)

    scan_cmd = commands.add_parser("scan", help="scan a source tree for crypto usage")
    scan_cmd.add_argument("--root", required=True, help="directory to scan")
    scan_cmd.add_argument("--ruleset", help="detection rules JSON (default: builtin)")
    scan_cmd.add_argument("--out", help="write findings JSON here instead of stdout")
    scan_cmd.add_argument(
        "--max-file-bytes",
        type=int,
        default=inventory.DEFAULT_MAX_FILE_BYTES,
        help="skip files larger than this (default %(default)s)",
    )
    scan_cmd.set_defaults(handler=_cmd_scan)

    inventory_cmd = commands.add_parser("inventory", help="build and check inventories")
    inventory_sub = inventory_cmd.add_subparsers(dest="subcommand", required=True)
    build_cmd = inventory_sub.add_parser("build", help="group findings into an inventory")
    build_cmd.add_argument("--findings", required=True, help="findings JSON from scan")
    build_cmd.add_argument("--kb", help="knowledge base JSON (default: builtin)")
    build_cmd.add_argument("--out", help="write inventory JSON here instead of stdout")
    build_cmd.set_defaults(handler=_cmd_inventory_build)
    check_cmd = inventory_sub.add_parser(
        "check-policy", help="evaluate an inventory against a policy"
    )
    check_cmd.add_argument("--inventory", required=True, help="inventory JSON file")
    check_cmd.add_argument("--policy", help="policy JSON (default: builtin baseline)")
    check_cmd.set_defaults(handler=_cmd_inventory_check_policy)

    mosca_cmd = commands.add_parser("mosca", help="check the x + y < z inequality")
    mosca_cmd.add_argument("--x", required=True, type=float, help="data shelf life, years")
    mosca_cmd.add_argument("--y", required=True, type=float, help="migration time, years")
    mosca_cmd.add_argument("--z", required=True, type=float, help="years until the threat")
    mosca_cmd.set_defaults(handler=_cmd_mosca)

    report_cmd = commands.add_parser("report", help="render an assessment report")
    report_cmd.add_argument("--session", required=True)
    report_cmd.add_argument(
        "--format", default="json", choices=["json", "md", "markdown", "html"]
    )
    report_cmd.add_argument("--target", type=int, help="include a gap plan to this level")
    report_cmd.add_argument("--inventory", help="include an inventory summary")
    report_cmd.add_argument("--out", help="write the report here instead of stdout")
    report_cmd.set_defaults(handler=_cmd_report)

    serve_cmd = commands.add_parser("serve", help="run the HTTP service")
    serve_cmd.add_argument("--addr", default="127.0.0.1:8571", help="HOST:PORT to bind")
    serve_cmd.add_argument(
        "--data",
        help="session storage directory (default: $CAMM_DATA_DIR or "
        + DEFAULT_DATA_DIR
        + ")",
    )
    serve_cmd.add_argument("--ui", help="serve this directory of static UI assets at /ui")
    serve_cmd.set_defaults(handler=_cmd_serve)

    return parser


def cli_main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if not exc.code else int(exc.code)
    try:
        return args.handler(args)
    except _USAGE_ERRORS as exc:
        _diag(f"error [{exc.code}]: {exc.message}")
        return EXIT_USAGE
    except CammError as exc:
        _diag(f"error [{exc.code}]: {exc.message}")
        return EXIT_DOMAIN
    except OSError as exc:
        _diag(f"error: {exc}")
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
