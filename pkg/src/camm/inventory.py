"""Cryptography inventory: scanning, strength classification, algorithm-set
logic, policy checks, and the Mosca effectiveness check.

Detection is token-based over text files: tuned for recall, reviewed by
humans. An unconfirmed inventory entry never counts as evidence; a token
the knowledge base does not recognize is kept visible as Weak with a
needs-review marker instead of being dropped.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field, replace
from datetime import date
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from .errors import (
    DataFormatError,
    EmptyInputError,
    InvalidAnnotationError,
    ScanError,
    UnknownAlgorithmError,
)


class Family(Enum):
    HASH = "hash"
    CIPHER = "cipher"
    SIGNATURE = "signature"
    KEX = "kex"
    CIPHERSUITE = "ciphersuite"
    OTHER = "other"


class StrengthLabel(Enum):
    BROKEN = "broken"
    WEAK = "weak"
    ACCEPTABLE = "acceptable"
    STRONG = "strong"

    @property
    def rank(self) -> int:
        return _LABEL_RANKS[self]


_LABEL_RANKS = {
    StrengthLabel.BROKEN: 0,
    StrengthLabel.WEAK: 1,
    StrengthLabel.ACCEPTABLE: 2,
    StrengthLabel.STRONG: 3,
}


@dataclass(frozen=True)
class StrengthClass:
    label: StrengthLabel
    classical_bits: Optional[int] = None
    quantum_resistant: bool = False
    rank: int = field(init=False, default=-1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rank", self.label.rank)

    def to_doc(self) -> dict:
        doc: dict = {
            "rank": self.rank,
            "label": self.label.value,
            "quantum_resistant": self.quantum_resistant,
        }
        if self.classical_bits is not None:
            doc["classical_bits"] = self.classical_bits
        return doc


@dataclass(frozen=True, eq=False)
class AlgorithmId:
    """Case-preserving algorithm name that compares case-insensitively."""

    canonical: str
    family: Family

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AlgorithmId):
            return NotImplemented
        return (
            self.canonical.lower() == other.canonical.lower()
            and self.family is other.family
        )

    def __hash__(self) -> int:
        return hash((self.canonical.lower(), self.family))

    def to_doc(self) -> dict:
        return {"canonical": self.canonical, "family": self.family.value}


@dataclass(frozen=True)
class Finding:
    algorithm: AlgorithmId
    path: str
    line: int
    column: int
    matched_text: str
    rule_id: str

    def sort_key(self) -> tuple:
        return (self.path, self.line, self.column, self.rule_id)

    def to_doc(self) -> dict:
        return {
            "algorithm": self.algorithm.to_doc(),
            "path": self.path,
            "line": self.line,
            "column": self.column,
            "matched_text": self.matched_text,
            "rule_id": self.rule_id,
        }


@dataclass(frozen=True)
class ScanResult:
    findings: tuple[Finding, ...]
    warnings: tuple[str, ...]

    def to_doc(self) -> dict:
        return {
            "findings": [finding.to_doc() for finding in self.findings],
            "warnings": list(self.warnings),
        }


_TEMPLATE_RE = re.compile(r"\{([0-9])\}")
_BACKREFERENCE_RE = re.compile(r"\\[1-9]|\(\?P=")


@dataclass(frozen=True)
class DetectionRule:
    """One scanner rule. ``algorithm`` is a template for the canonical
    name: {0} splices the whole match, {1}..{9} the capture groups."""

    rule_id: str
    pattern: str
    algorithm: str
    family: Family

    def __post_init__(self) -> None:
        if _BACKREFERENCE_RE.search(self.pattern):
            raise DataFormatError(
                f"rule {self.rule_id!r}: backreferences are not supported in"
                " detection patterns",
                details={"rule_id": self.rule_id},
            )
        try:
            compiled = re.compile(self.pattern)
        except re.error as exc:
            raise DataFormatError(
                f"rule {self.rule_id!r}: bad pattern: {exc}",
                details={"rule_id": self.rule_id},
            ) from exc
        for index_text in _TEMPLATE_RE.findall(self.algorithm):
            if int(index_text) > compiled.groups:
                raise DataFormatError(
                    f"rule {self.rule_id!r}: template references group"
                    f" {index_text} but the pattern has {compiled.groups}",
                    details={"rule_id": self.rule_id},
                )
        object.__setattr__(self, "_compiled", compiled)

    @property
    def regex(self) -> "re.Pattern[str]":
        return self._compiled  # type: ignore[attr-defined]

    def canonical_for(self, match: "re.Match[str]") -> str:
        return _TEMPLATE_RE.sub(lambda m: match.group(int(m.group(1))) or "", self.algorithm)


def load_ruleset(text: str) -> list[DetectionRule]:
    doc = _parse_json_array(text, "ruleset")
    rules: list[DetectionRule] = []
    seen: set[str] = set()
    for pos, row in enumerate(doc):
        if not isinstance(row, dict):
            raise DataFormatError(f"ruleset[{pos}] must be an object")
        rule_id = row.get("rule_id")
        pattern = row.get("pattern")
        algorithm = row.get("algorithm")
        family_raw = row.get("family")
        if not isinstance(rule_id, str) or not rule_id:
            raise DataFormatError(f"ruleset[{pos}].rule_id must be a non-empty string")
        if rule_id in seen:
            raise DataFormatError(f"duplicate rule_id {rule_id!r}")
        seen.add(rule_id)
        if not isinstance(pattern, str) or not pattern:
            raise DataFormatError(f"rule {rule_id!r}: pattern must be a non-empty string")
        if not isinstance(algorithm, str) or not algorithm:
            raise DataFormatError(f"rule {rule_id!r}: algorithm must be a non-empty string")
        try:
            family = Family(family_raw)
        except ValueError:
            raise DataFormatError(
                f"rule {rule_id!r}: family must be one of "
                + ", ".join(f.value for f in Family)
            ) from None
        rules.append(
            DetectionRule(rule_id=rule_id, pattern=pattern, algorithm=algorithm, family=family)
        )
    return rules


def _parse_json_array(text: str, what: str) -> list:
    import json

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(
            f"{what} is not valid JSON: {exc.msg}",
            details={"line": exc.lineno, "column": exc.colno},
        ) from exc
    if not isinstance(doc, list):
        raise DataFormatError(f"{what} must be a JSON array")
    return doc


@lru_cache(maxsize=1)
def builtin_ruleset() -> tuple[DetectionRule, ...]:
    text = resources.files("camm.data").joinpath("ruleset.json").read_text("utf-8")
    return tuple(load_ruleset(text))


_BINARY_PROBE_BYTES = 8192
DEFAULT_MAX_FILE_BYTES = 1_048_576


def scan_tree(
    root: Union[str, os.PathLike],
    ruleset: Optional[Iterable[DetectionRule]] = None,
    max_file_bytes: int = DEFAULT_MAX_FILE_BYTES,
) -> ScanResult:
    """Walk ``root`` and match every rule against every text line.

    Deterministic: files are visited in sorted order and findings sorted by
    (path, line, column, rule_id). Binary files (NUL byte in the first 8 KiB)
    are skipped silently; oversized and unreadable files produce warnings.
    """
    rules = tuple(ruleset) if ruleset is not None else builtin_ruleset()
    if not rules:
        raise ScanError("ruleset must not be empty")
    root_path = Path(root)
    if not root_path.is_dir():
        raise ScanError(f"scan root {str(root)!r} is not a readable directory")

    findings: list[Finding] = []
    warnings: list[str] = []
    for directory, dirnames, filenames in os.walk(root_path, followlinks=False):
        dirnames.sort()
        for filename in sorted(filenames):
            full = Path(directory) / filename
            rel = full.relative_to(root_path).as_posix()
            try:
                size = full.stat().st_size
            except OSError as exc:
                warnings.append(f"{rel}: unreadable ({exc.strerror or exc})")
                continue
            if size > max_file_bytes:
                warnings.append(
                    f"{rel}: skipped, {size} bytes exceeds the {max_file_bytes} byte limit"
                )
                continue
            try:
                data = full.read_bytes()
            except OSError as exc:
                warnings.append(f"{rel}: unreadable ({exc.strerror or exc})")
                continue
            if b"\x00" in data[:_BINARY_PROBE_BYTES]:
                continue
            text = data.decode("utf-8", errors="replace")
            for line_no, line in enumerate(text.splitlines(), start=1):
                for rule in rules:
                    for match in rule.regex.finditer(line):
                        findings.append(
                            Finding(
                                algorithm=AlgorithmId(
                                    canonical=rule.canonical_for(match),
                                    family=rule.family,
                                ),
                                path=rel,
                                line=line_no,
                                column=match.start() + 1,
                                matched_text=match.group(0),
                                rule_id=rule.rule_id,
                            )
                        )
    findings.sort(key=Finding.sort_key)
    return ScanResult(findings=tuple(findings), warnings=tuple(sorted(warnings)))


def findings_from_doc(doc: object) -> ScanResult:
    if not isinstance(doc, dict) or not isinstance(doc.get("findings"), list):
        raise DataFormatError("findings document must be an object with a 'findings' array")
    findings = []
    for pos, row in enumerate(doc["findings"]):
        context = f"findings[{pos}]"
        if not isinstance(row, dict) or not isinstance(row.get("algorithm"), dict):
            raise DataFormatError(f"{context} must be an object with an 'algorithm' object")
        alg = row["algorithm"]
        try:
            algorithm = AlgorithmId(canonical=alg["canonical"], family=Family(alg["family"]))
            findings.append(
                Finding(
                    algorithm=algorithm,
                    path=row["path"],
                    line=row["line"],
                    column=row["column"],
                    matched_text=row["matched_text"],
                    rule_id=row["rule_id"],
                )
            )
        except (KeyError, ValueError) as exc:
            raise DataFormatError(f"{context} is malformed: {exc}") from exc
    warnings = doc.get("warnings", [])
    if not isinstance(warnings, list) or not all(isinstance(w, str) for w in warnings):
        raise DataFormatError("'warnings' must be an array of strings")
    return ScanResult(findings=tuple(findings), warnings=tuple(warnings))


@dataclass(frozen=True)
class KbEntry:
    canonical: str
    family: Family
    strength: StrengthClass
    aliases: tuple[str, ...] = ()
    notes: Optional[str] = None


@dataclass(frozen=True)
class KnowledgeBase:
    entries: tuple[KbEntry, ...]

    def __post_init__(self) -> None:
        by_name: dict[str, KbEntry] = {}
        for entry in self.entries:
            for name in (entry.canonical, *entry.aliases):
                key = name.lower()
                other = by_name.get(key)
                if other is not None and other is not entry:
                    raise DataFormatError(
                        f"knowledge base name {name!r} maps to both"
                        f" {other.canonical!r} and {entry.canonical!r}",
                        details={"name": name},
                    )
                by_name[key] = entry
        object.__setattr__(self, "_by_name", by_name)

    def lookup(self, name: str) -> Optional[KbEntry]:
        """Case-insensitive lookup across canonical names and aliases."""
        return self._by_name.get(name.lower())  # type: ignore[attr-defined]

    def require(self, name: str) -> KbEntry:
        entry = self.lookup(name)
        if entry is None:
            raise UnknownAlgorithmError(
                f"algorithm {name!r} is not in the knowledge base",
                details={"algorithm": name},
            )
        return entry


def load_kb(text: str) -> KnowledgeBase:
    doc = _parse_json_array(text, "knowledge base")
    entries: list[KbEntry] = []
    for pos, row in enumerate(doc):
        context = f"knowledge base[{pos}]"
        if not isinstance(row, dict):
            raise DataFormatError(f"{context} must be an object")
        canonical = row.get("canonical")
        if not isinstance(canonical, str) or not canonical:
            raise DataFormatError(f"{context}.canonical must be a non-empty string")
        try:
            family = Family(row.get("family"))
        except ValueError:
            raise DataFormatError(
                f"{context} ({canonical}): family must be one of "
                + ", ".join(f.value for f in Family)
            ) from None
        try:
            label = StrengthLabel(row.get("label"))
        except ValueError:
            raise DataFormatError(
                f"{context} ({canonical}): label must be one of "
                + ", ".join(l.value for l in StrengthLabel)
            ) from None
        classical_bits = row.get("classical_bits")
        if classical_bits is not None and (
            not isinstance(classical_bits, int) or isinstance(classical_bits, bool)
        ):
            raise DataFormatError(f"{context} ({canonical}): classical_bits must be an integer")
        quantum_resistant = row.get("quantum_resistant")
        if not isinstance(quantum_resistant, bool):
            raise DataFormatError(
                f"{context} ({canonical}): quantum_resistant must be a boolean"
            )
        aliases = row.get("aliases", [])
        if not isinstance(aliases, list) or not all(isinstance(a, str) for a in aliases):
            raise DataFormatError(f"{context} ({canonical}): aliases must be an array of strings")
        notes = row.get("notes")
        if notes is not None and not isinstance(notes, str):
            raise DataFormatError(f"{context} ({canonical}): notes must be a string")
        entries.append(
            KbEntry(
                canonical=canonical,
                family=family,
                strength=StrengthClass(
                    label=label,
                    classical_bits=classical_bits,
                    quantum_resistant=quantum_resistant,
                ),
                aliases=tuple(aliases),
                notes=notes,
            )
        )
    return KnowledgeBase(entries=tuple(entries))


@lru_cache(maxsize=1)
def builtin_kb() -> KnowledgeBase:
    text = resources.files("camm.data").joinpath("knowledge_base.json").read_text("utf-8")
    return load_kb(text)


def classify_strength(
    algorithm: Union[AlgorithmId, str], kb: KnowledgeBase
) -> tuple[StrengthClass, bool]:
    """Strength per the knowledge base. Unknown algorithms come back as
    (Weak, needs_review=True) so they stay visible rather than vanish."""
    name = algorithm.canonical if isinstance(algorithm, AlgorithmId) else algorithm
    entry = kb.lookup(name)
    if entry is None:
        return StrengthClass(label=StrengthLabel.WEAK), True
    return entry.strength, False


_KEY_BITS_RE = re.compile(r"-([0-9]{2,5})$")

# families whose canonical-name suffix is a key length, not a digest size
_KEYED_FAMILIES = (Family.CIPHER, Family.SIGNATURE, Family.KEX)


def _key_bits_from_canonical(canonical: str, family: Family) -> Optional[int]:
    if family not in _KEYED_FAMILIES:
        return None
    match = _KEY_BITS_RE.search(canonical)
    return int(match.group(1)) if match else None


def _parse_date(value: object, context: str) -> Optional[date]:
    if value is None:
        return None
    if isinstance(value, date):
        return value
    if isinstance(value, str):
        try:
            return date.fromisoformat(value)
        except ValueError:
            pass
    raise InvalidAnnotationError(
        f"{context} must be an ISO date (YYYY-MM-DD), got {value!r}",
        details={"field": context},
    )


@dataclass(frozen=True)
class CryptoInventoryEntry:
    algorithm: AlgorithmId
    strength: StrengthClass
    needs_review: bool = False
    primitives: tuple[str, ...] = ()
    key_length_bits: Optional[int] = None
    purpose: str = ""
    deployed_on: Optional[date] = None
    deactivated_on: Optional[date] = None
    sources: tuple[str, ...] = ()
    confirmed: bool = False

    def __post_init__(self) -> None:
        if (
            self.deployed_on is not None
            and self.deactivated_on is not None
            and self.deactivated_on < self.deployed_on
        ):
            raise InvalidAnnotationError(
                f"{self.algorithm.canonical}: deactivated_on"
                f" {self.deactivated_on.isoformat()} precedes deployed_on"
                f" {self.deployed_on.isoformat()}",
                details={"algorithm": self.algorithm.canonical},
            )

    def is_active(self, as_of: Optional[date] = None) -> bool:
        if self.deactivated_on is None:
            return True
        return self.deactivated_on > (as_of or date.today())

    def to_doc(self) -> dict:
        doc: dict = {
            "algorithm": self.algorithm.to_doc(),
            "strength": self.strength.to_doc(),
            "needs_review": self.needs_review,
            "primitives": list(self.primitives),
            "purpose": self.purpose,
            "sources": list(self.sources),
            "confirmed": self.confirmed,
        }
        if self.key_length_bits is not None:
            doc["key_length_bits"] = self.key_length_bits
        if self.deployed_on is not None:
            doc["deployed_on"] = self.deployed_on.isoformat()
        if self.deactivated_on is not None:
            doc["deactivated_on"] = self.deactivated_on.isoformat()
        return doc


@dataclass(frozen=True)
class CryptoInventory:
    entries: tuple[CryptoInventoryEntry, ...]

    def entry(self, canonical: str) -> Optional[CryptoInventoryEntry]:
        wanted = canonical.lower()
        for entry in self.entries:
            if entry.algorithm.canonical.lower() == wanted:
                return entry
        return None

    def with_entry(self, updated: CryptoInventoryEntry) -> "CryptoInventory":
        wanted = updated.algorithm.canonical.lower()
        entries = tuple(
            updated if entry.algorithm.canonical.lower() == wanted else entry
            for entry in self.entries
        )
        return CryptoInventory(entries=entries)

    def to_doc(self) -> dict:
        return {"entries": [entry.to_doc() for entry in self.entries]}


_ANNOTATION_KEYS = frozenset(
    {
        "primitives",
        "key_length_bits",
        "purpose",
        "deployed_on",
        "deactivated_on",
        "confirmed",
    }
)


def annotate_entry(entry: CryptoInventoryEntry, **edits: object) -> CryptoInventoryEntry:
    """Apply human-supplied edits; date ordering is enforced by the entry."""
    unknown = set(edits) - _ANNOTATION_KEYS
    if unknown:
        raise InvalidAnnotationError(
            "unknown annotation fields: " + ", ".join(sorted(unknown)),
            details={"fields": sorted(unknown)},
        )
    fields: dict = {}
    if "primitives" in edits:
        primitives = edits["primitives"]
        if not isinstance(primitives, (list, tuple)) or not all(
            isinstance(p, str) for p in primitives
        ):
            raise InvalidAnnotationError("primitives must be an array of strings")
        fields["primitives"] = tuple(primitives)
    if "key_length_bits" in edits:
        bits = edits["key_length_bits"]
        if bits is not None and (not isinstance(bits, int) or isinstance(bits, bool)):
            raise InvalidAnnotationError("key_length_bits must be an integer")
        fields["key_length_bits"] = bits
    if "purpose" in edits:
        purpose = edits["purpose"]
        if not isinstance(purpose, str):
            raise InvalidAnnotationError("purpose must be a string")
        fields["purpose"] = purpose
    if "deployed_on" in edits:
        fields["deployed_on"] = _parse_date(edits["deployed_on"], "deployed_on")
    if "deactivated_on" in edits:
        fields["deactivated_on"] = _parse_date(edits["deactivated_on"], "deactivated_on")
    if "confirmed" in edits:
        confirmed = edits["confirmed"]
        if not isinstance(confirmed, bool):
            raise InvalidAnnotationError("confirmed must be a boolean")
        fields["confirmed"] = confirmed
    return replace(entry, **fields)


def build_inventory(
    findings: Iterable[Finding],
    kb: KnowledgeBase,
    annotations: Optional[Mapping[str, Mapping[str, object]]] = None,
) -> CryptoInventory:
    """One entry per distinct algorithm, linking back to its findings.

    Entries start unconfirmed. ``annotations`` maps canonical names to
    annotate_entry edits applied on top of the scan data.
    """
    annotations = annotations or {}
    grouped: dict[AlgorithmId, list[Finding]] = {}
    for finding in sorted(findings, key=Finding.sort_key):
        grouped.setdefault(finding.algorithm, []).append(finding)

    entries = []
    for algorithm in sorted(grouped, key=lambda a: (a.canonical, a.family.value)):
        strength, needs_review = classify_strength(algorithm, kb)
        entry = CryptoInventoryEntry(
            algorithm=algorithm,
            strength=strength,
            needs_review=needs_review,
            key_length_bits=_key_bits_from_canonical(algorithm.canonical, algorithm.family),
            sources=tuple(f"{f.path}:{f.line}" for f in grouped[algorithm]),
        )
        edits = annotations.get(algorithm.canonical)
        if edits:
            entry = annotate_entry(entry, **edits)
        entries.append(entry)
    return CryptoInventory(entries=tuple(entries))


def inventory_from_doc(doc: object) -> CryptoInventory:
    if not isinstance(doc, dict) or not isinstance(doc.get("entries"), list):
        raise DataFormatError("inventory document must be an object with an 'entries' array")
    entries = []
    for pos, row in enumerate(doc["entries"]):
        context = f"entries[{pos}]"
        if not isinstance(row, dict):
            raise DataFormatError(f"{context} must be an object")
        alg_doc = row.get("algorithm")
        strength_doc = row.get("strength")
        if not isinstance(alg_doc, dict) or not isinstance(strength_doc, dict):
            raise DataFormatError(
                f"{context} must carry 'algorithm' and 'strength' objects"
            )
        try:
            algorithm = AlgorithmId(
                canonical=alg_doc["canonical"], family=Family(alg_doc["family"])
            )
            strength = StrengthClass(
                label=StrengthLabel(strength_doc["label"]),
                classical_bits=strength_doc.get("classical_bits"),
                quantum_resistant=strength_doc.get("quantum_resistant", False),
            )
            entries.append(
                CryptoInventoryEntry(
                    algorithm=algorithm,
                    strength=strength,
                    needs_review=bool(row.get("needs_review", False)),
                    primitives=tuple(row.get("primitives", [])),
                    key_length_bits=row.get("key_length_bits"),
                    purpose=row.get("purpose", ""),
                    deployed_on=_parse_date(row.get("deployed_on"), f"{context}.deployed_on"),
                    deactivated_on=_parse_date(
                        row.get("deactivated_on"), f"{context}.deactivated_on"
                    ),
                    sources=tuple(row.get("sources", [])),
                    confirmed=bool(row.get("confirmed", False)),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise DataFormatError(f"{context} is malformed: {exc}") from exc
        except InvalidAnnotationError as exc:
            raise DataFormatError(f"{context} is malformed: {exc.message}") from exc
    return CryptoInventory(entries=tuple(entries))


@dataclass(frozen=True)
class Policy:
    name: str
    min_key_bits: Mapping[Family, int] = field(default_factory=dict)
    forbidden: frozenset[str] = frozenset()
    min_strength_label: Optional[StrengthLabel] = None
    require_quantum_resistant: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_forbidden_lower", frozenset(name.lower() for name in self.forbidden)
        )

    def forbids(self, canonical: str) -> bool:
        return canonical.lower() in self._forbidden_lower  # type: ignore[attr-defined]

    def allows(
        self,
        canonical: str,
        family: Family,
        strength: StrengthClass,
        key_length_bits: Optional[int] = None,
    ) -> bool:
        """Single verdict used for selection; check_policy reports the
        individual broken rules instead."""
        if self.forbids(canonical):
            return False
        if (
            self.min_strength_label is not None
            and strength.rank < self.min_strength_label.rank
        ):
            return False
        if self.require_quantum_resistant and not strength.quantum_resistant:
            return False
        required = self.min_key_bits.get(family)
        if required is not None:
            bits = (
                key_length_bits
                if key_length_bits is not None
                else _key_bits_from_canonical(canonical, family)
            )
            # unknown key length is not a selection blocker; inventory
            # review is where that gets resolved
            if bits is not None and bits < required:
                return False
        return True


def load_policy(text: str) -> Policy:
    import json

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(
            f"policy is not valid JSON: {exc.msg}",
            details={"line": exc.lineno, "column": exc.colno},
        ) from exc
    if not isinstance(doc, dict):
        raise DataFormatError("policy must be a JSON object")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise DataFormatError("policy.name must be a non-empty string")
    min_key_bits_doc = doc.get("min_key_bits", {})
    if not isinstance(min_key_bits_doc, dict):
        raise DataFormatError("policy.min_key_bits must be an object")
    min_key_bits: dict[Family, int] = {}
    for family_raw, bits in min_key_bits_doc.items():
        try:
            family = Family(family_raw)
        except ValueError:
            raise DataFormatError(
                f"policy.min_key_bits key {family_raw!r} is not a family"
            ) from None
        if not isinstance(bits, int) or isinstance(bits, bool) or bits < 0:
            raise DataFormatError(
                f"policy.min_key_bits[{family_raw}] must be a non-negative integer"
            )
        min_key_bits[family] = bits
    forbidden = doc.get("forbidden", [])
    if not isinstance(forbidden, list) or not all(isinstance(f, str) for f in forbidden):
        raise DataFormatError("policy.forbidden must be an array of algorithm names")
    label_raw = doc.get("min_strength_label")
    min_strength_label = None
    if label_raw is not None:
        try:
            min_strength_label = StrengthLabel(label_raw)
        except ValueError:
            raise DataFormatError(
                "policy.min_strength_label must be one of "
                + ", ".join(l.value for l in StrengthLabel)
            ) from None
    require_qr = doc.get("require_quantum_resistant", False)
    if not isinstance(require_qr, bool):
        raise DataFormatError("policy.require_quantum_resistant must be a boolean")
    return Policy(
        name=name,
        min_key_bits=min_key_bits,
        forbidden=frozenset(forbidden),
        min_strength_label=min_strength_label,
        require_quantum_resistant=require_qr,
    )


@lru_cache(maxsize=1)
def default_policy() -> Policy:
    text = resources.files("camm.data").joinpath("policy_default.json").read_text("utf-8")
    return load_policy(text)


@dataclass(frozen=True)
class PolicyViolation:
    rule: str
    canonical: str
    message: str

    def to_doc(self) -> dict:
        return {"rule": self.rule, "canonical": self.canonical, "message": self.message}


def check_policy(
    inventory: CryptoInventory, policy: Policy, as_of: Optional[date] = None
) -> list[PolicyViolation]:
    """One violation per broken rule per entry. Only confirmed, active
    entries are evaluated; unconfirmed scan hits are not yet evidence."""
    violations: list[PolicyViolation] = []
    for entry in inventory.entries:
        if not entry.confirmed or not entry.is_active(as_of):
            continue
        canonical = entry.algorithm.canonical
        if policy.forbids(canonical):
            violations.append(
                PolicyViolation(
                    rule="FORBIDDEN_ALGORITHM",
                    canonical=canonical,
                    message=f"{canonical} is forbidden by policy {policy.name!r}"
                    " but still active",
                )
            )
        required = policy.min_key_bits.get(entry.algorithm.family)
        if (
            required is not None
            and entry.key_length_bits is not None
            and entry.key_length_bits < required
        ):
            violations.append(
                PolicyViolation(
                    rule="MIN_KEY_BITS",
                    canonical=canonical,
                    message=f"{canonical} uses {entry.key_length_bits} bit keys;"
                    f" policy {policy.name!r} requires at least {required}"
                    f" for {entry.algorithm.family.value} algorithms",
                )
            )
        if (
            policy.min_strength_label is not None
            and entry.strength.rank < policy.min_strength_label.rank
        ):
            violations.append(
                PolicyViolation(
                    rule="MIN_STRENGTH",
                    canonical=canonical,
                    message=f"{canonical} is rated {entry.strength.label.value};"
                    f" policy {policy.name!r} requires at least"
                    f" {policy.min_strength_label.value}",
                )
            )
        if policy.require_quantum_resistant and not entry.strength.quantum_resistant:
            violations.append(
                PolicyViolation(
                    rule="QUANTUM_RESISTANCE",
                    canonical=canonical,
                    message=f"{canonical} is not quantum resistant;"
                    f" policy {policy.name!r} requires resistance",
                )
            )
    return violations


def algorithm_intersection(supported: Iterable[Iterable[AlgorithmId]]) -> set[AlgorithmId]:
    """Algorithms every subsystem supports. Non-empty result means the
    subsystems can interoperate at all."""
    sets = [set(member) for member in supported]
    if not sets:
        raise EmptyInputError("at least one supported-algorithm set is required")
    common = sets[0]
    for member in sets[1:]:
        common = common & member
    return common


def select_opportunistic(
    local: Iterable[Union[AlgorithmId, str]],
    remote: Iterable[Union[AlgorithmId, str]],
    kb: KnowledgeBase,
    policy: Optional[Policy] = None,
) -> Optional[AlgorithmId]:
    """Strongest mutually supported algorithm that the policy allows.

    Accepts names or AlgorithmId values; every ID on either side must be
    known to the knowledge base. Returns None when nothing qualifies;
    that is an outcome, not an error. Ties on strength rank resolve to
    the lexicographically smallest canonical name.
    """

    def normalize(side: Iterable[Union[AlgorithmId, str]]) -> set[AlgorithmId]:
        normalized = set()
        for item in side:
            name = item.canonical if isinstance(item, AlgorithmId) else item
            entry = kb.require(name)
            normalized.add(AlgorithmId(entry.canonical, entry.family))
        return normalized

    best: Optional[AlgorithmId] = None
    best_key: Optional[tuple[int, str]] = None
    for algorithm in normalize(local) & normalize(remote):
        strength = kb.require(algorithm.canonical).strength
        if policy is not None and not policy.allows(
            algorithm.canonical,
            algorithm.family,
            strength,
            _key_bits_from_canonical(algorithm.canonical, algorithm.family),
        ):
            continue
        key = (-strength.rank, algorithm.canonical)
        if best_key is None or key < best_key:
            best, best_key = algorithm, key
    return best


def excluded_in_use(
    inventory: CryptoInventory,
    exclusions: Iterable[Union[AlgorithmId, str]],
    as_of: Optional[date] = None,
) -> list[CryptoInventoryEntry]:
    """Entries that are marked excluded yet still active. Empty means the
    exclusion mechanism is actually honored."""
    wanted = {
        (item.canonical if isinstance(item, AlgorithmId) else item).lower()
        for item in exclusions
    }
    return [
        entry
        for entry in inventory.entries
        if entry.algorithm.canonical.lower() in wanted and entry.is_active(as_of)
    ]


@dataclass(frozen=True)
class MoscaParameters:
    """x: years the data must stay secure; y: years the migration takes;
    z: years until the threat arrives."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"{name} must be a number")
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {value!r}")


def mosca_check(params: MoscaParameters) -> tuple[bool, float]:
    """Strict inequality x + y < z; the margin is the remaining slack in
    years (negative when already too late)."""
    total = params.x + params.y
    return total < params.z, params.z - total
