"""Maturity model data: loading, validation, and dependency-graph analysis.

The model itself is data, not code. It ships as a JSON document (see
``camm/data/model_v1.json``) so a future revision of the model can be
loaded without touching the engine.
"""

from __future__ import annotations

import heapq
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Iterator, Optional

from .errors import ModelFormatError, UnknownRequirementError

MODEL_VERSION = "1"

_ID_RE = re.compile(r"^R[0-9]{2}$")


class Category(Enum):
    """Requirement category, keyed by the short code used in the model file."""

    KNOWLEDGE = "K"
    PROCESS = "P"
    SYSTEM_PROPERTY = "S"

    @property
    def label(self) -> str:
        return _CATEGORY_LABELS[self]


_CATEGORY_LABELS = {
    Category.KNOWLEDGE: "Knowledge",
    Category.PROCESS: "Process",
    Category.SYSTEM_PROPERTY: "System property",
}


@dataclass(frozen=True)
class MaturityLevel:
    number: int
    name: str


@dataclass(frozen=True)
class Requirement:
    id: str
    level: int
    category: Category
    name: str
    description: str
    problem: str
    acceptance: str
    dependencies: tuple[str, ...]
    examples: tuple[str, ...]


@dataclass(frozen=True)
class MaturityModel:
    version: str
    levels: tuple[MaturityLevel, ...]
    requirements: tuple[Requirement, ...]

    def __post_init__(self) -> None:
        index: dict[str, Requirement] = {}
        for req in self.requirements:
            # first declaration wins; duplicates are caught by validate_model
            index.setdefault(req.id, req)
        object.__setattr__(self, "_index", index)

    def requirement(self, requirement_id: str) -> Requirement:
        try:
            return self._index[requirement_id]  # type: ignore[attr-defined]
        except KeyError:
            raise UnknownRequirementError(
                f"no requirement {requirement_id!r} in model version {self.version}",
                details={"requirement_id": requirement_id},
            ) from None

    def has_requirement(self, requirement_id: str) -> bool:
        return requirement_id in self._index  # type: ignore[attr-defined]

    def requirement_ids(self) -> tuple[str, ...]:
        return tuple(req.id for req in unique_requirements(self))

    def by_level(self, level: int) -> tuple[Requirement, ...]:
        return tuple(req for req in unique_requirements(self) if req.level == level)

    def level_name(self, number: int) -> Optional[str]:
        for lvl in self.levels:
            if lvl.number == number:
                return lvl.name
        return None


@dataclass(frozen=True)
class DependencyGraph:
    """Edges are (requirement, dependency) pairs: the first depends on the second.

    The edge set mirrors the model's ``dependencies`` fields verbatim,
    including edges whose target does not resolve; analyses skip those.
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def dependencies_of(self, requirement_id: str) -> tuple[str, ...]:
        return tuple(dep for req, dep in self.edges if req == requirement_id)

    def dependents_of(self, requirement_id: str) -> tuple[str, ...]:
        return tuple(req for req, dep in self.edges if dep == requirement_id)


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str
    requirement_ids: tuple[str, ...] = ()

    def to_doc(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "requirement_ids": list(self.requirement_ids),
        }


@dataclass(frozen=True)
class ModelValidationReport:
    errors: tuple[ValidationIssue, ...]
    warnings: tuple[ValidationIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_doc(self) -> dict:
        return {
            "ok": self.ok,
            "errors": [issue.to_doc() for issue in self.errors],
            "warnings": [issue.to_doc() for issue in self.warnings],
        }


def unique_requirements(model: MaturityModel) -> Iterator[Requirement]:
    """Requirements in declaration order, first occurrence of each ID."""
    seen: set[str] = set()
    for req in model.requirements:
        if req.id in seen:
            continue
        seen.add(req.id)
        yield req


_TEXT_FIELDS = ("name", "description", "problem", "acceptance")


def load_model(text: str) -> MaturityModel:
    """Parse a model definition document.

    Shape problems raise ModelFormatError naming the offending field;
    semantic checks (duplicates, dangling edges, cycles) are the job of
    validate_model and do not fail here.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"model document is not valid JSON: {exc.msg}",
            details={"line": exc.lineno, "column": exc.colno},
        ) from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")

    version = doc.get("version")
    if not isinstance(version, str) or not version:
        raise ModelFormatError(
            "'version' must be a non-empty string", details={"field": "version"}
        )

    levels_doc = doc.get("levels")
    if not isinstance(levels_doc, list) or not levels_doc:
        raise ModelFormatError(
            "'levels' must be a non-empty array", details={"field": "levels"}
        )
    levels = []
    for pos, row in enumerate(levels_doc):
        path = f"levels[{pos}]"
        if not isinstance(row, dict):
            raise ModelFormatError(f"'{path}' must be an object", details={"field": path})
        number = row.get("number")
        if not isinstance(number, int) or isinstance(number, bool):
            raise ModelFormatError(
                f"'{path}.number' must be an integer", details={"field": f"{path}.number"}
            )
        name = row.get("name")
        if not isinstance(name, str) or not name:
            raise ModelFormatError(
                f"'{path}.name' must be a non-empty string",
                details={"field": f"{path}.name"},
            )
        levels.append(MaturityLevel(number=number, name=name))

    requirements_doc = doc.get("requirements")
    if not isinstance(requirements_doc, list):
        raise ModelFormatError(
            "'requirements' must be an array", details={"field": "requirements"}
        )
    requirements = tuple(
        _load_requirement(row, pos) for pos, row in enumerate(requirements_doc)
    )
    return MaturityModel(version=version, levels=tuple(levels), requirements=requirements)


def _load_requirement(row: object, pos: int) -> Requirement:
    path = f"requirements[{pos}]"
    if not isinstance(row, dict):
        raise ModelFormatError(f"'{path}' must be an object", details={"field": path})
    req_id = row.get("id")
    if not isinstance(req_id, str) or not _ID_RE.match(req_id):
        raise ModelFormatError(
            f"'{path}.id' must be 'R' followed by two digits, got {req_id!r}",
            details={"field": f"{path}.id"},
        )
    level = row.get("level")
    if not isinstance(level, int) or isinstance(level, bool):
        raise ModelFormatError(
            f"'{path}.level' must be an integer", details={"field": f"{path}.level"}
        )
    raw_category = row.get("category")
    try:
        category = Category(raw_category)
    except ValueError:
        raise ModelFormatError(
            f"'{path}.category' must be one of K, P, S, got {raw_category!r}",
            details={"field": f"{path}.category"},
        ) from None
    texts = {}
    for field_name in _TEXT_FIELDS:
        value = row.get(field_name)
        if not isinstance(value, str) or not value:
            raise ModelFormatError(
                f"'{path}.{field_name}' must be a non-empty string",
                details={"field": f"{path}.{field_name}"},
            )
        texts[field_name] = value
    dependencies = row.get("dependencies")
    if not isinstance(dependencies, list) or not all(
        isinstance(dep, str) for dep in dependencies
    ):
        raise ModelFormatError(
            f"'{path}.dependencies' must be an array of requirement IDs",
            details={"field": f"{path}.dependencies"},
        )
    examples = row.get("examples", [])
    if not isinstance(examples, list) or not all(isinstance(e, str) for e in examples):
        raise ModelFormatError(
            f"'{path}.examples' must be an array of strings",
            details={"field": f"{path}.examples"},
        )
    return Requirement(
        id=req_id,
        level=level,
        category=category,
        dependencies=tuple(dependencies),
        examples=tuple(examples),
        **texts,
    )


def model_to_doc(model: MaturityModel) -> dict:
    """Inverse of load_model for serialization and the HTTP surface."""
    return {
        "version": model.version,
        "levels": [{"number": lvl.number, "name": lvl.name} for lvl in model.levels],
        "requirements": [
            {
                "id": req.id,
                "level": req.level,
                "category": req.category.value,
                "name": req.name,
                "description": req.description,
                "problem": req.problem,
                "acceptance": req.acceptance,
                "dependencies": list(req.dependencies),
                "examples": list(req.examples),
            }
            for req in model.requirements
        ],
    }


def dependency_graph(model: MaturityModel) -> DependencyGraph:
    nodes = tuple(sorted({req.id for req in model.requirements}))
    edges = sorted(
        (req.id, dep) for req in unique_requirements(model) for dep in req.dependencies
    )
    return DependencyGraph(nodes=nodes, edges=tuple(edges))


def validate_model(model: MaturityModel) -> ModelValidationReport:
    """Semantic checks. Always returns a report, never raises."""
    errors: list[ValidationIssue] = []
    warnings: list[ValidationIssue] = []

    if not model.requirements:
        errors.append(
            ValidationIssue("NO_REQUIREMENTS", "model declares no requirements")
        )

    for lvl in model.levels:
        if not 0 <= lvl.number <= 4:
            errors.append(
                ValidationIssue(
                    "LEVEL_OUT_OF_RANGE",
                    f"declared level {lvl.number} is outside 0..4",
                )
            )

    counts: dict[str, int] = {}
    for req in model.requirements:
        counts[req.id] = counts.get(req.id, 0) + 1
    for req_id in sorted(counts):
        if counts[req_id] > 1:
            errors.append(
                ValidationIssue(
                    "DUPLICATE_ID",
                    f"requirement {req_id} is declared {counts[req_id]} times",
                    (req_id,),
                )
            )

    known = set(counts)
    declared_levels = {lvl.number for lvl in model.levels}
    for req in unique_requirements(model):
        if not 1 <= req.level <= 4 or req.level not in declared_levels:
            errors.append(
                ValidationIssue(
                    "LEVEL_OUT_OF_RANGE",
                    f"{req.id} declares level {req.level}, which is not a declared"
                    " requirement level",
                    (req.id,),
                )
            )
        elif int(req.id[1]) != req.level:
            errors.append(
                ValidationIssue(
                    "ID_LEVEL_MISMATCH",
                    f"{req.id} declares level {req.level} but its ID encodes"
                    f" level {req.id[1]}",
                    (req.id,),
                )
            )
        for dep in req.dependencies:
            if dep == req.id:
                warnings.append(
                    ValidationIssue(
                        "SELF_DEPENDENCY", f"{req.id} depends on itself", (req.id,)
                    )
                )
            elif dep not in known:
                errors.append(
                    ValidationIssue(
                        "DANGLING_DEPENDENCY",
                        f"{req.id} depends on {dep}, which does not exist",
                        (req.id, dep),
                    )
                )
            else:
                dep_level = model.requirement(dep).level
                if dep_level > req.level:
                    warnings.append(
                        ValidationIssue(
                            "FORWARD_DEPENDENCY",
                            f"{req.id} (level {req.level}) depends on {dep}"
                            f" (level {dep_level})",
                            (req.id, dep),
                        )
                    )

    for component in detect_cycles(dependency_graph(model)):
        warnings.append(
            ValidationIssue(
                "DEPENDENCY_CYCLE",
                "mutual dependencies among " + ", ".join(component),
                component,
            )
        )

    return ModelValidationReport(errors=tuple(errors), warnings=tuple(warnings))


def detect_cycles(graph: DependencyGraph) -> list[tuple[str, ...]]:
    """Strongly connected components of size 2 or more, each sorted by ID,
    the list sorted by smallest member."""
    known = set(graph.nodes)
    adjacency: dict[str, list[str]] = {node: [] for node in graph.nodes}
    for req, dep in graph.edges:
        if req in known and dep in known and dep != req:
            adjacency[req].append(dep)
    for succ in adjacency.values():
        succ.sort()
    components = _strongly_connected_components(sorted(known), adjacency)
    cyclic = [tuple(sorted(comp)) for comp in components if len(comp) > 1]
    return sorted(cyclic)


def _strongly_connected_components(
    nodes: list[str], adjacency: dict[str, list[str]]
) -> list[list[str]]:
    # Tarjan, iterative: recursion would overflow on deep custom models.
    counter = 0
    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[list[str]] = []

    for root in nodes:
        if root in index:
            continue
        work: list[tuple[str, int]] = [(root, 0)]
        while work:
            node, edge_pos = work[-1]
            if edge_pos == 0:
                index[node] = lowlink[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            descended = False
            successors = adjacency.get(node, [])
            while edge_pos < len(successors):
                succ = successors[edge_pos]
                edge_pos += 1
                if succ not in index:
                    work[-1] = (node, edge_pos)
                    work.append((succ, 0))
                    descended = True
                    break
                if succ in on_stack:
                    lowlink[node] = min(lowlink[node], index[succ])
            if descended:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                components.append(component)
    return components


def evaluation_order(model: MaturityModel) -> list[str]:
    """Deterministic total order over requirement IDs.

    Levels ascend; within a level, same-level dependencies come first
    (cycles condensed into their SCC); ties and SCC members resolve by
    ascending ID. Cross-level and dangling edges do not constrain the
    order.
    """
    by_level: dict[int, list[Requirement]] = {}
    for req in unique_requirements(model):
        by_level.setdefault(req.level, []).append(req)
    order: list[str] = []
    for level in sorted(by_level):
        order.extend(_level_order(by_level[level]))
    return order


def _level_order(reqs: list[Requirement]) -> list[str]:
    ids = {req.id for req in reqs}
    adjacency = {
        req.id: sorted(set(dep for dep in req.dependencies if dep in ids and dep != req.id))
        for req in reqs
    }
    components = _strongly_connected_components(sorted(ids), adjacency)

    member_of: dict[str, int] = {}
    groups: list[tuple[str, ...]] = []
    for component in components:
        key = len(groups)
        groups.append(tuple(sorted(component)))
        for node in component:
            member_of[node] = key

    indegree = [0] * len(groups)
    successors: list[set[int]] = [set() for _ in groups]
    for req in reqs:
        for dep in set(req.dependencies):
            if dep not in ids or dep == req.id:
                continue
            source, target = member_of[dep], member_of[req.id]
            if source != target and target not in successors[source]:
                successors[source].add(target)
                indegree[target] += 1

    heap = [(groups[i][0], i) for i in range(len(groups)) if indegree[i] == 0]
    heapq.heapify(heap)
    out: list[str] = []
    while heap:
        _, pos = heapq.heappop(heap)
        out.extend(groups[pos])
        for succ in sorted(successors[pos]):
            indegree[succ] -= 1
            if indegree[succ] == 0:
                heapq.heappush(heap, (groups[succ][0], succ))
    return out


@lru_cache(maxsize=1)
def builtin_model() -> MaturityModel:
    """The canonical model shipped with the package."""
    text = resources.files("camm.data").joinpath("model_v1.json").read_text("utf-8")
    return load_model(text)
