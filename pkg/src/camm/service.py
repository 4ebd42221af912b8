"""HTTP service wrapping the assessment library.

Sessions live as one JSON file each under a data directory. Writes go
through a temp-file-then-rename step so a crash mid-write can never leave
a truncated session behind, and every update is guarded by an expected
revision number so two concurrent writers cannot silently overwrite each
other: the loser gets a 409 and retries from fresh state.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import assessment, inventory, report
from .errors import (
    CammError,
    EmptyInputError,
    InvalidAnnotationError,
    InvalidEvidenceError,
    InvalidStatusError,
    MissingJustificationError,
    RevisionConflictError,
    ScanError,
    SessionFormatError,
    UnknownAlgorithmError,
    UnknownRequirementError,
    UnknownSessionError,
)
from .jsonutil import canonical_json
from .model import (
    MaturityModel,
    builtin_model,
    evaluation_order,
    model_to_doc,
    validate_model,
)

_SESSION_ID_RE = re.compile(r"^[0-9a-f]{32}$")

_NOT_FOUND_ERRORS = (
    UnknownSessionError,
    UnknownRequirementError,
    UnknownAlgorithmError,
)
_UNPROCESSABLE_ERRORS = (
    MissingJustificationError,
    InvalidStatusError,
    InvalidEvidenceError,
    InvalidAnnotationError,
)


def _status_for(exc: CammError) -> int:
    if isinstance(exc, _NOT_FOUND_ERRORS):
        return 404
    if isinstance(exc, RevisionConflictError):
        return 409
    if isinstance(exc, _UNPROCESSABLE_ERRORS):
        return 422
    return 400


def _canonical_response(doc: dict, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(doc),
        status_code=status_code,
        media_type="application/json",
    )


class SessionStore:
    """File-backed session storage with per-session write locks."""

    # split out so tests can inject a fault at the rename step
    _replace = staticmethod(os.replace)

    def __init__(self, data_dir: Path, model: MaturityModel) -> None:
        self.data_dir = data_dir
        self.model = model
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path(self, session_id: str) -> Path:
        if not _SESSION_ID_RE.match(session_id):
            raise UnknownSessionError(f"no session with ID {session_id!r}")
        return self.data_dir / f"{session_id}.json"

    def create(self, subject: str) -> assessment.AssessmentSession:
        session = assessment.create_session(self.model, subject)
        self.save(session)
        return session

    def load(self, session_id: str) -> assessment.AssessmentSession:
        path = self._path(session_id)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise UnknownSessionError(f"no session with ID {session_id!r}") from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SessionFormatError(
                f"stored session {session_id} is not valid JSON: {exc.msg}"
            ) from exc
        if not isinstance(doc, dict):
            raise SessionFormatError(f"stored session {session_id} must be an object")
        return assessment.session_from_doc(doc, self.model)

    def save(self, session: assessment.AssessmentSession) -> None:
        path = self._path(session.session_id)
        text = canonical_json(assessment.session_to_doc(session))
        fd, tmp_name = tempfile.mkstemp(
            dir=str(self.data_dir), prefix=f".{session.session_id}.", suffix=".tmp"
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(text)
                handle.flush()
                os.fsync(handle.fileno())
            self._replace(tmp_name, path)
        finally:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)

    def list_ids(self) -> list[str]:
        ids = [
            path.stem
            for path in self.data_dir.glob("*.json")
            if _SESSION_ID_RE.match(path.stem)
        ]
        return sorted(ids)


@dataclass
class ScanRecord:
    scan_id: str
    root: str
    result: inventory.ScanResult
    inventory: inventory.CryptoInventory


@dataclass
class ScanRegistry:
    """In-memory scan results keyed by scan ID, annotatable in place."""

    kb: inventory.KnowledgeBase
    records: dict[str, ScanRecord] = field(default_factory=dict)
    _guard: threading.Lock = field(default_factory=threading.Lock)

    def run(self, root: str, ruleset: Optional[str]) -> ScanRecord:
        rules = None
        if ruleset:
            rules = inventory.load_ruleset(Path(ruleset).read_text(encoding="utf-8"))
        result = inventory.scan_tree(root, rules)
        built = inventory.build_inventory(result.findings, self.kb)
        record = ScanRecord(uuid.uuid4().hex, root, result, built)
        with self._guard:
            self.records[record.scan_id] = record
        return record

    def get(self, scan_id: str) -> ScanRecord:
        with self._guard:
            record = self.records.get(scan_id)
        if record is None:
            raise ScanError(f"no scan with ID {scan_id!r}", details={"scan_id": scan_id})
        return record

    def annotate(self, scan_id: str, canonical: str, edits: dict) -> inventory.CryptoInventoryEntry:
        with self._guard:
            record = self.records.get(scan_id)
            if record is None:
                raise ScanError(
                    f"no scan with ID {scan_id!r}", details={"scan_id": scan_id}
                )
            entry = record.inventory.entry(canonical)
            if entry is None:
                raise UnknownAlgorithmError(
                    f"scan {scan_id} has no inventory entry for {canonical!r}"
                )
            updated = inventory.annotate_entry(entry, **edits)
            record.inventory = record.inventory.with_entry(updated)
        return updated


def _require_str(payload: dict, key: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str):
        raise InvalidStatusError(f"field {key!r} must be a string")
    return value


def _evidence_from_payload(items: object) -> list[assessment.EvidenceItem]:
    if items is None:
        return []
    if not isinstance(items, list):
        raise InvalidEvidenceError("field 'evidence' must be a list")
    parsed = []
    for item in items:
        if not isinstance(item, dict):
            raise InvalidEvidenceError("each evidence item must be an object")
        kind = item.get("kind")
        payload = item.get("payload")
        if not isinstance(kind, str) or not isinstance(payload, str):
            raise InvalidEvidenceError(
                "evidence items need string 'kind' and 'payload' fields"
            )
        immutable = item.get("immutable", False)
        if not isinstance(immutable, bool):
            raise InvalidEvidenceError("evidence field 'immutable' must be a boolean")
        parsed.append(assessment.evidence_item(kind, payload, immutable=immutable))
    return parsed


_ANNOTATION_FIELDS = (
    "primitives",
    "key_length_bits",
    "purpose",
    "deployed_on",
    "deactivated_on",
    "confirmed",
)


def create_app(
    data_dir: str | Path,
    model: Optional[MaturityModel] = None,
    ui_dir: Optional[str | Path] = None,
) -> FastAPI:
    active_model = model if model is not None else builtin_model()
    store = SessionStore(Path(data_dir), active_model)
    scans = ScanRegistry(kb=inventory.builtin_kb())
    # the UI orders its question queue by this; computed once, model is immutable
    model_payload = model_to_doc(active_model)
    model_payload["evaluation_order"] = list(evaluation_order(active_model))

    app = FastAPI(title="camm", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.scans = scans

    @app.exception_handler(CammError)
    async def camm_error_handler(request: Request, exc: CammError) -> JSONResponse:
        return JSONResponse(status_code=_status_for(exc), content=exc.to_dict())

    @app.exception_handler(RequestValidationError)
    async def invalid_payload_handler(
        request: Request, exc: RequestValidationError
    ) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={
                "code": "INVALID_PAYLOAD",
                "message": "request body or parameters failed validation",
                "details": {"errors": [str(error) for error in exc.errors()]},
            },
        )

    @app.get("/api/v1/model")
    async def get_model() -> Response:
        return _canonical_response(model_payload)

    @app.get("/api/v1/model/validation")
    async def get_model_validation() -> Response:
        return _canonical_response(validate_model(active_model).to_doc())

    @app.post("/api/v1/sessions", status_code=201)
    async def post_session(payload: dict = Body(...)) -> Response:
        subject = payload.get("subject")
        if not isinstance(subject, str):
            raise InvalidStatusError("field 'subject' must be a string")
        session = store.create(subject)
        return _canonical_response(
            {
                "session_id": session.session_id,
                "subject": session.subject,
                "model_version": session.model_version,
                "revision": session.revision,
            },
            status_code=201,
        )

    @app.get("/api/v1/sessions")
    async def list_sessions() -> Response:
        summaries = []
        for session_id in store.list_ids():
            session = store.load(session_id)
            summaries.append(
                {
                    "session_id": session.session_id,
                    "subject": session.subject,
                    "revision": session.revision,
                }
            )
        return _canonical_response({"sessions": summaries})

    @app.get("/api/v1/sessions/{session_id}")
    async def get_session(session_id: str) -> Response:
        session = store.load(session_id)
        return _canonical_response(assessment.session_to_doc(session))

    @app.put("/api/v1/sessions/{session_id}/requirements/{requirement_id}")
    async def put_requirement(
        session_id: str, requirement_id: str, payload: dict = Body(...)
    ) -> Response:
        status = _require_str(payload, "status")
        justification = payload.get("justification")
        if justification is not None and not isinstance(justification, str):
            raise InvalidStatusError("field 'justification' must be a string")
        expected = payload.get("expected_revision")
        if not isinstance(expected, int) or isinstance(expected, bool):
            raise InvalidStatusError("field 'expected_revision' must be an integer")
        evidence = _evidence_from_payload(payload.get("evidence"))
        with store.lock(session_id):
            session = store.load(session_id)
            if session.revision != expected:
                raise RevisionConflictError(
                    f"session {session_id} is at revision {session.revision}, "
                    f"not {expected}",
                    details={"current_revision": session.revision},
                )
            assessment.set_status(
                session,
                requirement_id,
                status,
                justification=justification,
                evidence=evidence,
            )
            store.save(session)
        return _canonical_response(
            {
                "session_id": session.session_id,
                "requirement_id": requirement_id,
                "revision": session.revision,
                "level": assessment.achieved_level(session).to_doc(),
            }
        )

    @app.get("/api/v1/sessions/{session_id}/level")
    async def get_level(session_id: str) -> Response:
        session = store.load(session_id)
        return _canonical_response(assessment.level_report_doc(session))

    @app.get("/api/v1/sessions/{session_id}/gap")
    async def get_gap(session_id: str, target: int) -> Response:
        session = store.load(session_id)
        plan = assessment.gap_analysis(session, target)
        doc = plan.to_doc()
        doc["session_id"] = session.session_id
        return _canonical_response(doc)

    @app.post("/api/v1/sessions/{session_id}/what-if")
    async def post_what_if(session_id: str, payload: dict = Body(...)) -> Response:
        overrides = payload.get("overrides", payload)
        if not isinstance(overrides, dict):
            raise InvalidStatusError("field 'overrides' must be an object")
        session = store.load(session_id)
        before, after = assessment.what_if(session, overrides)
        return _canonical_response(
            {
                "session_id": session.session_id,
                "before": before.to_doc(),
                "after": after.to_doc(),
            }
        )

    @app.get("/api/v1/sessions/{session_id}/report")
    async def get_report(session_id: str, format: str = "json") -> Response:
        session = store.load(session_id)
        assembled = report.build_report(session)
        data = report.render_report(assembled, format)
        media_type = {
            "json": "application/json",
            "md": "text/markdown; charset=utf-8",
            "markdown": "text/markdown; charset=utf-8",
            "html": "text/html; charset=utf-8",
        }[report.normalize_format(format)]
        return Response(content=data, media_type=media_type)

    @app.get("/api/v1/aggregate")
    async def get_aggregate(sessions: str = "") -> Response:
        session_ids = [part for part in sessions.split(",") if part]
        if not session_ids:
            raise EmptyInputError("query parameter 'sessions' must list session IDs")
        results = []
        for session_id in session_ids:
            results.append(assessment.achieved_level(store.load(session_id)))
        combined = assessment.aggregate_level(results)
        doc = combined.to_doc()
        doc["sessions"] = session_ids
        return _canonical_response(doc)

    @app.post("/api/v1/scans", status_code=201)
    async def post_scan(payload: dict = Body(...)) -> Response:
        root = payload.get("root")
        if not isinstance(root, str) or not root:
            raise ScanError("field 'root' must be a non-empty string")
        ruleset = payload.get("ruleset")
        if ruleset is not None and not isinstance(ruleset, str):
            raise ScanError("field 'ruleset' must be a path string")
        record = scans.run(root, ruleset)
        return _canonical_response(
            {
                "scan_id": record.scan_id,
                "root": record.root,
                "findings_count": len(record.result.findings),
                "warnings": list(record.result.warnings),
            },
            status_code=201,
        )

    @app.get("/api/v1/scans/{scan_id}/findings")
    async def get_scan_findings(scan_id: str) -> Response:
        record = scans.get(scan_id)
        doc = record.result.to_doc()
        doc["scan_id"] = record.scan_id
        doc["root"] = record.root
        return _canonical_response(doc)

    @app.get("/api/v1/scans/{scan_id}/inventory")
    async def get_scan_inventory(scan_id: str) -> Response:
        record = scans.get(scan_id)
        doc = record.inventory.to_doc()
        doc["scan_id"] = record.scan_id
        return _canonical_response(doc)

    @app.put("/api/v1/scans/{scan_id}/inventory/{canonical}")
    async def put_scan_inventory_entry(
        scan_id: str, canonical: str, payload: dict = Body(...)
    ) -> Response:
        edits = {}
        for key in payload:
            if key not in _ANNOTATION_FIELDS:
                raise InvalidAnnotationError(f"unknown annotation field {key!r}")
            edits[key] = payload[key]
        updated = scans.annotate(scan_id, canonical, edits)
        return _canonical_response(updated.to_doc())

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
