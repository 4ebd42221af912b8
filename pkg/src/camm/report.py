"""Assessment reports: assembly plus JSON, Markdown, and HTML rendering.

The JSON form is the source of truth and round-trips losslessly; the
Markdown and HTML forms are human-facing views of the same document with
a stage diagram, the blocking table, and not-applicable justifications.
"""

from __future__ import annotations

import html
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional

from .assessment import (
    AssessmentSession,
    Status,
    achieved_level,
    gap_analysis,
    session_to_doc,
)
from .errors import DataFormatError, UnsupportedFormatError
from .inventory import CryptoInventory
from .jsonutil import canonical_json
from .model import Category, unique_requirements

FORMATS = ("json", "markdown", "html")

_FORMAT_ALIASES = {"md": "markdown", "htm": "html"}


@dataclass(frozen=True)
class Report:
    """All fields are JSON-shaped so the report serializes losslessly."""

    session: dict
    level: dict
    levels: list
    category_tallies: dict
    na_justifications: list
    gap: Optional[dict]
    inventory_summary: Optional[dict]
    generated_at: str
    model_version: str

    def to_doc(self) -> dict:
        doc = {
            "session": self.session,
            "level": self.level,
            "levels": self.levels,
            "category_tallies": self.category_tallies,
            "na_justifications": self.na_justifications,
            "generated_at": self.generated_at,
            "model_version": self.model_version,
        }
        if self.gap is not None:
            doc["gap"] = self.gap
        if self.inventory_summary is not None:
            doc["inventory_summary"] = self.inventory_summary
        return doc


def report_from_doc(doc: object) -> Report:
    if not isinstance(doc, dict):
        raise DataFormatError("report document must be a JSON object")
    try:
        return Report(
            session=doc["session"],
            level=doc["level"],
            levels=doc["levels"],
            category_tallies=doc["category_tallies"],
            na_justifications=doc["na_justifications"],
            gap=doc.get("gap"),
            inventory_summary=doc.get("inventory_summary"),
            generated_at=doc["generated_at"],
            model_version=doc["model_version"],
        )
    except KeyError as exc:
        raise DataFormatError(f"report document is missing {exc.args[0]!r}") from exc


def _category_tallies(session: AssessmentSession) -> dict:
    tallies = {
        category.value: {
            "satisfied": 0,
            "violated": 0,
            "unknown": 0,
            "not_applicable": 0,
            "total": 0,
        }
        for category in Category
    }
    for req in unique_requirements(session.model):
        record = session.statuses.get(req.id)
        status = record.status if record else Status.UNKNOWN
        bucket = tallies[req.category.value]
        bucket[status.value] += 1
        bucket["total"] += 1
    return tallies


def _inventory_summary(inventory: CryptoInventory) -> dict:
    by_label: dict[str, int] = {}
    needs_review = 0
    confirmed = 0
    for entry in inventory.entries:
        by_label[entry.strength.label.value] = by_label.get(entry.strength.label.value, 0) + 1
        needs_review += 1 if entry.needs_review else 0
        confirmed += 1 if entry.confirmed else 0
    return {
        "algorithms": len(inventory.entries),
        "confirmed": confirmed,
        "needs_review": needs_review,
        "by_label": dict(sorted(by_label.items())),
    }


def build_report(
    session: AssessmentSession,
    gap_target: Optional[int] = None,
    inventory: Optional[CryptoInventory] = None,
) -> Report:
    return Report(
        session=session_to_doc(session),
        level=achieved_level(session).to_doc(),
        levels=[
            {"number": lvl.number, "name": lvl.name} for lvl in session.model.levels
        ],
        category_tallies=_category_tallies(session),
        na_justifications=[
            {"requirement_id": rid, "justification": record.justification or ""}
            for rid, record in sorted(session.statuses.items())
            if record.status is Status.NOT_APPLICABLE
        ],
        gap=gap_analysis(session, gap_target).to_doc() if gap_target is not None else None,
        inventory_summary=_inventory_summary(inventory) if inventory is not None else None,
        generated_at=datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        model_version=session.model_version,
    )


def normalize_format(fmt: str) -> str:
    normalized = _FORMAT_ALIASES.get(fmt, fmt)
    if normalized not in FORMATS:
        raise UnsupportedFormatError(
            f"unsupported report format {fmt!r}; expected one of " + ", ".join(FORMATS),
            details={"format": fmt},
        )
    return normalized


def render_report(report: Report, fmt: str) -> bytes:
    normalized = normalize_format(fmt)
    if normalized == "json":
        return canonical_json(report.to_doc()).encode("utf-8")
    if normalized == "markdown":
        return _render_markdown(report).encode("utf-8")
    return _render_html(report).encode("utf-8")


def _stage_rows(report: Report) -> list[tuple[int, str, bool]]:
    strict = report.level["strict_level"]
    rows = []
    for level_doc in sorted(report.levels, key=lambda l: l["number"], reverse=True):
        number = level_doc["number"]
        rows.append((number, level_doc["name"], number <= strict))
    return rows


def _render_markdown(report: Report) -> str:
    level = report.level
    strict = level["strict_level"]
    lines = [
        f"# Crypto-agility assessment: {report.session['subject']}",
        "",
        f"- Session: `{report.session['session_id']}` (revision"
        f" {report.session['revision']})",
        f"- Model version: {report.model_version}",
        f"- Generated: {report.generated_at}",
        "",
        "## Maturity stage",
        "",
        f"Strict level **{strict}**, optimistic level"
        f" **{level['optimistic_level']}**.",
        "",
        "```",
    ]
    for number, name, reached in _stage_rows(report):
        marker = "x" if reached else " "
        achieved = "  <- achieved" if number == strict else ""
        lines.append(f"[{marker}] {number}  {name}{achieved}")
    lines.extend(["```", "", "## Blocking requirements", ""])
    blocking = level.get("blocking", {})
    if any(blocking.values()):
        lines.extend(["| Level | Not met |", "|---|---|"])
        for key in sorted(blocking, key=int):
            ids = ", ".join(blocking[key]) if blocking[key] else "(none)"
            lines.append(f"| {key} | {ids} |")
    else:
        lines.append("Nothing blocks the next level yet.")
    lines.extend(
        [
            "",
            "## Requirement categories",
            "",
            "| Category | Satisfied | Violated | Unknown | Not applicable | Total |",
            "|---|---|---|---|---|---|",
        ]
    )
    for code in sorted(report.category_tallies):
        tally = report.category_tallies[code]
        lines.append(
            f"| {code} | {tally['satisfied']} | {tally['violated']} |"
            f" {tally['unknown']} | {tally['not_applicable']} | {tally['total']} |"
        )
    if report.na_justifications:
        lines.extend(["", "## Not applicable", ""])
        for item in report.na_justifications:
            lines.append(f"- {item['requirement_id']}: {item['justification']}")
    if report.gap is not None:
        gap = report.gap
        lines.extend(["", f"## Gap to level {gap['target_level']}", ""])
        if gap["missing"]:
            reach = "reachable" if gap["reachable"] else "NOT reachable as assessed"
            lines.append(f"{len(gap['missing'])} requirements missing ({reach}):")
            lines.append("")
            for pos, item in enumerate(gap["missing"], start=1):
                lines.append(f"{pos}. {item['requirement_id']} ({item['status']})")
        else:
            lines.append("Already achieved.")
    if report.inventory_summary is not None:
        summary = report.inventory_summary
        lines.extend(
            [
                "",
                "## Inventory summary",
                "",
                f"- Algorithms: {summary['algorithms']}",
                f"- Confirmed: {summary['confirmed']}",
                f"- Needing review: {summary['needs_review']}",
            ]
        )
        for label, count in summary["by_label"].items():
            lines.append(f"- {label}: {count}")
    lines.append("")
    return "\n".join(lines)


def _render_html(report: Report) -> str:
    level = report.level
    strict = level["strict_level"]
    subject = html.escape(report.session["subject"])
    parts = [
        "<!doctype html>",
        "<html><head><meta charset=\"utf-8\">",
        f"<title>Crypto-agility assessment: {subject}</title>",
        "<style>",
        "body{font-family:sans-serif;margin:2rem;}",
        "table{border-collapse:collapse;}",
        "td,th{border:1px solid #999;padding:0.3rem 0.6rem;}",
        ".achieved{background:#cfe8cf;font-weight:bold;}",
        ".reached{background:#eaf5ea;}",
        "</style></head><body>",
        f"<h1>Crypto-agility assessment: {subject}</h1>",
        f"<p>Session <code>{html.escape(report.session['session_id'])}</code>,"
        f" model version {html.escape(report.model_version)},"
        f" generated {html.escape(report.generated_at)}.</p>",
        "<h2>Maturity stage</h2>",
        f"<p>Strict level {strict}, optimistic level {level['optimistic_level']}.</p>",
        "<table><tr><th>Stage</th><th>Name</th></tr>",
    ]
    for number, name, reached in _stage_rows(report):
        css = "achieved" if number == strict else ("reached" if reached else "")
        attr = f" class=\"{css}\"" if css else ""
        parts.append(f"<tr{attr}><td>{number}</td><td>{html.escape(name)}</td></tr>")
    parts.append("</table>")

    parts.append("<h2>Blocking requirements</h2>")
    blocking = level.get("blocking", {})
    if any(blocking.values()):
        parts.append("<table><tr><th>Level</th><th>Not met</th></tr>")
        for key in sorted(blocking, key=int):
            ids = html.escape(", ".join(blocking[key])) if blocking[key] else "(none)"
            parts.append(f"<tr><td>{key}</td><td>{ids}</td></tr>")
        parts.append("</table>")
    else:
        parts.append("<p>Nothing blocks the next level yet.</p>")

    parts.append("<h2>Requirement categories</h2>")
    parts.append(
        "<table><tr><th>Category</th><th>Satisfied</th><th>Violated</th>"
        "<th>Unknown</th><th>Not applicable</th><th>Total</th></tr>"
    )
    for code in sorted(report.category_tallies):
        tally = report.category_tallies[code]
        parts.append(
            f"<tr><td>{code}</td><td>{tally['satisfied']}</td>"
            f"<td>{tally['violated']}</td><td>{tally['unknown']}</td>"
            f"<td>{tally['not_applicable']}</td><td>{tally['total']}</td></tr>"
        )
    parts.append("</table>")

    if report.na_justifications:
        parts.append("<h2>Not applicable</h2><ul>")
        for item in report.na_justifications:
            parts.append(
                f"<li>{html.escape(item['requirement_id'])}:"
                f" {html.escape(item['justification'])}</li>"
            )
        parts.append("</ul>")

    if report.gap is not None:
        gap = report.gap
        parts.append(f"<h2>Gap to level {gap['target_level']}</h2>")
        if gap["missing"]:
            reach = "reachable" if gap["reachable"] else "NOT reachable as assessed"
            parts.append(f"<p>{len(gap['missing'])} requirements missing ({reach}).</p><ol>")
            for item in gap["missing"]:
                parts.append(
                    f"<li>{html.escape(item['requirement_id'])}"
                    f" ({html.escape(item['status'])})</li>"
                )
            parts.append("</ol>")
        else:
            parts.append("<p>Already achieved.</p>")

    if report.inventory_summary is not None:
        summary = report.inventory_summary
        parts.append("<h2>Inventory summary</h2><ul>")
        parts.append(f"<li>Algorithms: {summary['algorithms']}</li>")
        parts.append(f"<li>Confirmed: {summary['confirmed']}</li>")
        parts.append(f"<li>Needing review: {summary['needs_review']}</li>")
        for label, count in summary["by_label"].items():
            parts.append(f"<li>{html.escape(label)}: {count}</li>")
        parts.append("</ul>")

    parts.append("</body></html>")
    return "\n".join(parts)


def parse_rendered_json(data: bytes) -> Report:
    """Inverse of render_report(..., "json")."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"rendered report is not valid JSON: {exc}") from exc
    return report_from_doc(doc)
