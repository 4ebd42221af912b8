"""Assessment sessions and level computation.

A session records per-requirement statuses for one subject. Levels follow
the fallback rule: a level counts as achieved only when it and every level
below it are fully met, so a single violation at level X caps the result
at X-1. The strict reading treats Unknown as unmet, the optimistic reading
as met; together they bracket the true level of a partially answered
assessment.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Mapping, Optional, Union

from .errors import (
    EmptyInputError,
    EmptySubjectError,
    InvalidEvidenceError,
    InvalidModelError,
    InvalidStatusError,
    InvalidTargetError,
    MissingJustificationError,
    SessionFormatError,
    UnknownRequirementError,
)
from .model import MaturityModel, unique_requirements, evaluation_order, validate_model


class Status(Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    UNKNOWN = "unknown"
    NOT_APPLICABLE = "not_applicable"


class EvidenceKind(Enum):
    NOTE = "note"
    FILE_REF = "file_ref"
    INVENTORY_REF = "inventory_ref"
    POLICY_CHECK_REF = "policy_check_ref"
    MOSCA_CHECK_REF = "mosca_check_ref"


def parse_status(value: Union[Status, str]) -> Status:
    if isinstance(value, Status):
        return value
    try:
        return Status(value)
    except ValueError:
        raise InvalidStatusError(
            f"unknown status {value!r}; expected one of "
            + ", ".join(s.value for s in Status),
            details={"status": value},
        ) from None


@dataclass(frozen=True)
class EvidenceItem:
    kind: EvidenceKind
    payload: str
    recorded_at: str
    # marks a violation as unfixable, e.g. hardware past its support life
    immutable: bool = False

    def to_doc(self) -> dict:
        doc = {
            "kind": self.kind.value,
            "payload": self.payload,
            "recorded_at": self.recorded_at,
        }
        if self.immutable:
            doc["immutable"] = True
        return doc


@dataclass(frozen=True)
class StatusRecord:
    status: Status
    justification: Optional[str] = None
    evidence: tuple[EvidenceItem, ...] = ()


@dataclass(frozen=True)
class HistoryEvent:
    revision: int
    requirement_id: str
    status: Status
    justification: Optional[str]
    evidence: tuple[EvidenceItem, ...]
    recorded_at: str


@dataclass(frozen=True)
class LevelResult:
    strict_level: int
    optimistic_level: int
    # per level above strict_level: IDs not met under the strict reading
    blocking: dict[int, list[str]]

    def to_doc(self) -> dict:
        return {
            "strict_level": self.strict_level,
            "optimistic_level": self.optimistic_level,
            "blocking": {str(level): list(ids) for level, ids in self.blocking.items()},
        }


@dataclass(frozen=True)
class GapPlan:
    target_level: int
    missing: tuple[tuple[str, Status], ...]
    reachable: bool

    def to_doc(self) -> dict:
        return {
            "target_level": self.target_level,
            "missing": [
                {"requirement_id": rid, "status": status.value}
                for rid, status in self.missing
            ],
            "reachable": self.reachable,
        }


@dataclass
class AssessmentSession:
    session_id: str
    model_version: str
    subject: str
    model: MaturityModel = field(repr=False, compare=False)
    statuses: dict[str, StatusRecord] = field(default_factory=dict)
    revision: int = 0
    history: list[HistoryEvent] = field(default_factory=list)


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def evidence_item(
    kind: Union[EvidenceKind, str],
    payload: str,
    immutable: bool = False,
    recorded_at: Optional[str] = None,
) -> EvidenceItem:
    """Build a validated evidence item with a current timestamp."""
    if not isinstance(kind, EvidenceKind):
        try:
            kind = EvidenceKind(kind)
        except ValueError:
            raise InvalidEvidenceError(
                f"unknown evidence kind {kind!r}; expected one of "
                + ", ".join(k.value for k in EvidenceKind),
                details={"kind": kind},
            ) from None
    if not payload:
        raise InvalidEvidenceError("evidence payload must be non-empty")
    return EvidenceItem(
        kind=kind,
        payload=payload,
        recorded_at=recorded_at or _utc_now(),
        immutable=immutable,
    )


def create_session(model: MaturityModel, subject: str) -> AssessmentSession:
    """New session against a validated model; every requirement starts
    implicitly Unknown."""
    report = validate_model(model)
    if not report.ok:
        raise InvalidModelError(
            "refusing to assess against an invalid model: "
            + report.errors[0].message,
            details={"errors": [issue.to_doc() for issue in report.errors]},
        )
    if not subject or not subject.strip():
        raise EmptySubjectError("subject must be non-empty")
    return AssessmentSession(
        session_id=uuid.uuid4().hex,
        model_version=model.version,
        subject=subject,
        model=model,
    )


def set_status(
    session: AssessmentSession,
    requirement_id: str,
    status: Union[Status, str],
    justification: Optional[str] = None,
    evidence: Iterable[EvidenceItem] = (),
) -> AssessmentSession:
    """Record a status. Evidence accumulates across calls; the status and
    justification are replaced. Appends to the history log and bumps the
    revision by one."""
    if not session.model.has_requirement(requirement_id):
        raise UnknownRequirementError(
            f"no requirement {requirement_id!r} in model version"
            f" {session.model_version}",
            details={"requirement_id": requirement_id},
        )
    status = parse_status(status)
    if status is Status.NOT_APPLICABLE and not (justification and justification.strip()):
        raise MissingJustificationError(
            f"marking {requirement_id} not applicable requires a justification",
            details={"requirement_id": requirement_id},
        )
    added = tuple(evidence)
    for item in added:
        if not item.payload:
            raise InvalidEvidenceError("evidence payload must be non-empty")
    prior = session.statuses.get(requirement_id)
    merged = (prior.evidence if prior else ()) + added
    session.statuses[requirement_id] = StatusRecord(
        status=status, justification=justification, evidence=merged
    )
    session.revision += 1
    session.history.append(
        HistoryEvent(
            revision=session.revision,
            requirement_id=requirement_id,
            status=status,
            justification=justification,
            evidence=added,
            recorded_at=_utc_now(),
        )
    )
    return session


def _met(record: Optional[StatusRecord], optimistic: bool) -> bool:
    if record is None:
        return optimistic
    if record.status in (Status.SATISFIED, Status.NOT_APPLICABLE):
        return True
    if record.status is Status.UNKNOWN:
        return optimistic
    return False


def _compute_level(
    model: MaturityModel, statuses: Mapping[str, StatusRecord]
) -> LevelResult:
    by_level: dict[int, list[str]] = {1: [], 2: [], 3: [], 4: []}
    for req in unique_requirements(model):
        by_level.setdefault(req.level, []).append(req.id)

    strict = 0
    optimistic = 0
    strict_blocked = False
    optimistic_blocked = False
    strict_unmet: dict[int, list[str]] = {}
    for level in sorted(by_level):
        unmet_strict = sorted(
            rid for rid in by_level[level] if not _met(statuses.get(rid), optimistic=False)
        )
        strict_unmet[level] = unmet_strict
        if unmet_strict:
            strict_blocked = True
        if not strict_blocked:
            strict = level
        if any(not _met(statuses.get(rid), optimistic=True) for rid in by_level[level]):
            optimistic_blocked = True
        if not optimistic_blocked:
            optimistic = level

    blocking = {level: strict_unmet[level] for level in sorted(strict_unmet) if level > strict}
    return LevelResult(strict_level=strict, optimistic_level=optimistic, blocking=blocking)


def achieved_level(session: AssessmentSession) -> LevelResult:
    return _compute_level(session.model, session.statuses)


def aggregate_level(results: Iterable[LevelResult]) -> LevelResult:
    """Landscape view over several components: the weakest one decides."""
    members = list(results)
    if not members:
        raise EmptyInputError("at least one level result is required")
    strict = min(member.strict_level for member in members)
    optimistic = min(member.optimistic_level for member in members)
    merged: dict[int, set[str]] = {}
    for member in members:
        for level, ids in member.blocking.items():
            merged.setdefault(level, set()).update(ids)
    blocking = {level: sorted(ids) for level, ids in merged.items() if level > strict}
    for level in range(strict + 1, 5):
        blocking.setdefault(level, [])
    return LevelResult(
        strict_level=strict,
        optimistic_level=optimistic,
        blocking=dict(sorted(blocking.items())),
    )


def gap_analysis(session: AssessmentSession, target_level: int) -> GapPlan:
    """Requirements still separating the session from ``target_level``,
    in evaluation order. Unreachable when a missing requirement is
    Violated with evidence marked immutable."""
    if (
        not isinstance(target_level, int)
        or isinstance(target_level, bool)
        or not 1 <= target_level <= 4
    ):
        raise InvalidTargetError(
            f"target level must be an integer in 1..4, got {target_level!r}",
            details={"target_level": target_level},
        )
    missing: list[tuple[str, Status]] = []
    blocked = False
    for rid in evaluation_order(session.model):
        req = session.model.requirement(rid)
        if not 1 <= req.level <= target_level:
            continue
        record = session.statuses.get(rid)
        status = record.status if record else Status.UNKNOWN
        if status in (Status.SATISFIED, Status.NOT_APPLICABLE):
            continue
        missing.append((rid, status))
        if (
            status is Status.VIOLATED
            and record is not None
            and any(item.immutable for item in record.evidence)
        ):
            blocked = True
    return GapPlan(target_level=target_level, missing=tuple(missing), reachable=not blocked)


def what_if(
    session: AssessmentSession, overrides: Mapping[str, Union[Status, str]]
) -> tuple[LevelResult, LevelResult]:
    """Project the level with hypothetical statuses overlaid. Pure: the
    session is not modified. Returns (current, projected)."""
    parsed: dict[str, Status] = {}
    for rid, status in overrides.items():
        if not session.model.has_requirement(rid):
            raise UnknownRequirementError(
                f"no requirement {rid!r} in model version {session.model_version}",
                details={"requirement_id": rid},
            )
        parsed[rid] = parse_status(status)
    before = achieved_level(session)
    overlaid = dict(session.statuses)
    for rid, status in parsed.items():
        overlaid[rid] = StatusRecord(status=status)
    after = _compute_level(session.model, overlaid)
    return before, after


def next_questions(session: AssessmentSession, limit: int) -> list[str]:
    """The first ``limit`` unanswered requirements in evaluation order
    (which already ascends by level, so lower levels come first)."""
    unanswered = [
        rid
        for rid in evaluation_order(session.model)
        if session.statuses.get(rid) is None
        or session.statuses[rid].status is Status.UNKNOWN
    ]
    return unanswered[: max(0, limit)]


def level_report_doc(session: AssessmentSession) -> dict:
    """Level result plus identifying context; the CLI and the HTTP service
    both serialize exactly this document."""
    doc = achieved_level(session).to_doc()
    doc["session_id"] = session.session_id
    doc["model_version"] = session.model_version
    doc["subject"] = session.subject
    return doc


def session_to_doc(session: AssessmentSession) -> dict:
    return {
        "session_id": session.session_id,
        "model_version": session.model_version,
        "subject": session.subject,
        "revision": session.revision,
        "statuses": {
            rid: _record_to_doc(record) for rid, record in sorted(session.statuses.items())
        },
        "history": [_event_to_doc(event) for event in session.history],
    }


def _record_to_doc(record: StatusRecord) -> dict:
    doc: dict = {"status": record.status.value}
    if record.justification is not None:
        doc["justification"] = record.justification
    if record.evidence:
        doc["evidence"] = [item.to_doc() for item in record.evidence]
    return doc


def _event_to_doc(event: HistoryEvent) -> dict:
    doc: dict = {
        "revision": event.revision,
        "requirement_id": event.requirement_id,
        "status": event.status.value,
        "recorded_at": event.recorded_at,
    }
    if event.justification is not None:
        doc["justification"] = event.justification
    if event.evidence:
        doc["evidence"] = [item.to_doc() for item in event.evidence]
    return doc


def _require(doc: dict, key: str, kind: type, context: str):
    value = doc.get(key)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise SessionFormatError(
            f"{context}.{key} must be {kind.__name__}", details={"field": f"{context}.{key}"}
        )
    return value


def _evidence_from_doc(doc: object, context: str) -> EvidenceItem:
    if not isinstance(doc, dict):
        raise SessionFormatError(f"{context} must be an object")
    kind_raw = _require(doc, "kind", str, context)
    try:
        kind = EvidenceKind(kind_raw)
    except ValueError:
        raise SessionFormatError(
            f"{context}.kind is not a known evidence kind: {kind_raw!r}"
        ) from None
    payload = _require(doc, "payload", str, context)
    recorded_at = _require(doc, "recorded_at", str, context)
    immutable = doc.get("immutable", False)
    if not isinstance(immutable, bool):
        raise SessionFormatError(f"{context}.immutable must be a boolean")
    return EvidenceItem(kind=kind, payload=payload, recorded_at=recorded_at, immutable=immutable)


def session_from_doc(doc: dict, model: MaturityModel) -> AssessmentSession:
    """Rebuild a session from its JSON document, checked against ``model``."""
    if not isinstance(doc, dict):
        raise SessionFormatError("session document must be a JSON object")
    session_id = _require(doc, "session_id", str, "session")
    model_version = _require(doc, "model_version", str, "session")
    if model_version != model.version:
        raise SessionFormatError(
            f"session was recorded against model version {model_version!r},"
            f" not {model.version!r}",
            details={"session_model_version": model_version, "model_version": model.version},
        )
    subject = _require(doc, "subject", str, "session")
    revision = _require(doc, "revision", int, "session")
    if revision < 0:
        raise SessionFormatError("session.revision must be non-negative")

    statuses_doc = doc.get("statuses", {})
    if not isinstance(statuses_doc, dict):
        raise SessionFormatError("session.statuses must be an object")
    statuses: dict[str, StatusRecord] = {}
    for rid, record_doc in statuses_doc.items():
        if not model.has_requirement(rid):
            raise SessionFormatError(
                f"session.statuses references unknown requirement {rid!r}",
                details={"requirement_id": rid},
            )
        if not isinstance(record_doc, dict):
            raise SessionFormatError(f"session.statuses.{rid} must be an object")
        status_raw = _require(record_doc, "status", str, f"session.statuses.{rid}")
        try:
            status = Status(status_raw)
        except ValueError:
            raise SessionFormatError(
                f"session.statuses.{rid}.status is not a known status: {status_raw!r}"
            ) from None
        justification = record_doc.get("justification")
        if justification is not None and not isinstance(justification, str):
            raise SessionFormatError(f"session.statuses.{rid}.justification must be a string")
        evidence_doc = record_doc.get("evidence", [])
        if not isinstance(evidence_doc, list):
            raise SessionFormatError(f"session.statuses.{rid}.evidence must be an array")
        evidence = tuple(
            _evidence_from_doc(item, f"session.statuses.{rid}.evidence[{pos}]")
            for pos, item in enumerate(evidence_doc)
        )
        statuses[rid] = StatusRecord(status=status, justification=justification, evidence=evidence)

    history_doc = doc.get("history", [])
    if not isinstance(history_doc, list):
        raise SessionFormatError("session.history must be an array")
    history: list[HistoryEvent] = []
    for pos, event_doc in enumerate(history_doc):
        context = f"session.history[{pos}]"
        if not isinstance(event_doc, dict):
            raise SessionFormatError(f"{context} must be an object")
        event_revision = _require(event_doc, "revision", int, context)
        rid = _require(event_doc, "requirement_id", str, context)
        status_raw = _require(event_doc, "status", str, context)
        try:
            status = Status(status_raw)
        except ValueError:
            raise SessionFormatError(
                f"{context}.status is not a known status: {status_raw!r}"
            ) from None
        justification = event_doc.get("justification")
        if justification is not None and not isinstance(justification, str):
            raise SessionFormatError(f"{context}.justification must be a string")
        evidence_doc = event_doc.get("evidence", [])
        if not isinstance(evidence_doc, list):
            raise SessionFormatError(f"{context}.evidence must be an array")
        evidence = tuple(
            _evidence_from_doc(item, f"{context}.evidence[{pos2}]")
            for pos2, item in enumerate(evidence_doc)
        )
        history.append(
            HistoryEvent(
                revision=event_revision,
                requirement_id=rid,
                status=status,
                justification=justification,
                evidence=evidence,
                recorded_at=_require(event_doc, "recorded_at", str, context),
            )
        )

    return AssessmentSession(
        session_id=session_id,
        model_version=model_version,
        subject=subject,
        model=model,
        statuses=statuses,
        revision=revision,
        history=history,
    )


def replay_statuses(session: AssessmentSession) -> dict[str, StatusRecord]:
    """Fold the history log from revision 0; the result must equal the
    stored status map (integrity property, pinned in tests)."""
    statuses: dict[str, StatusRecord] = {}
    for event in sorted(session.history, key=lambda e: e.revision):
        prior = statuses.get(event.requirement_id)
        merged = (prior.evidence if prior else ()) + event.evidence
        statuses[event.requirement_id] = StatusRecord(
            status=event.status, justification=event.justification, evidence=merged
        )
    return statuses
