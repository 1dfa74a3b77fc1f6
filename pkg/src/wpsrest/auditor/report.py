"""Compliance reports and their table/JSON renderings."""

from __future__ import annotations

import json
from datetime import datetime
from typing import Literal

from pydantic import BaseModel, Field, computed_field, model_validator

Verdict = Literal["yes", "partial", "no", "error", "not-probed"]
VERDICTS: tuple[str, ...] = ("yes", "partial", "no", "error", "not-probed")
RANK = {"no": 0, "partial": 1, "yes": 2}


class ComplianceCheck(BaseModel):
    check_id: str
    table_row: str
    probe_description: str
    verdict: Verdict
    evidence: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _evidence_backs_verdict(self):
        if self.verdict in ("yes", "partial", "no") and not self.evidence:
            raise ValueError(f"{self.check_id}: a {self.verdict} verdict needs evidence")
        return self


class ComplianceReport(BaseModel):
    target: str
    timestamp: datetime
    style: str = "auto"
    reachable: bool = True
    checks: list[ComplianceCheck] = Field(default_factory=list)

    @computed_field
    @property
    def counts(self) -> dict[str, int]:
        tally = dict.fromkeys(VERDICTS, 0)
        for check in self.checks:
            tally[check.verdict] += 1
        return tally

    @model_validator(mode="before")
    @classmethod
    def _counts_match(cls, data):
        if isinstance(data, dict) and "counts" in data:
            data = dict(data)
            claimed = data.pop("counts")
            actual = dict.fromkeys(VERDICTS, 0)
            for check in data.get("checks", []):
                verdict = check["verdict"] if isinstance(check, dict) else check.verdict
                actual[verdict] = actual.get(verdict, 0) + 1
            if any(claimed.get(v, 0) != actual.get(v, 0) for v in set(claimed) | set(actual)):
                raise ValueError(f"verdict counts {claimed} do not match the checks {actual}")
        return data

    def verdicts(self) -> dict[str, str]:
        return {c.check_id: c.verdict for c in self.checks}

    def check(self, check_id: str) -> ComplianceCheck:
        return next(c for c in self.checks if c.check_id == check_id)


# -- rendering ---------------------------------------------------------------

_COLUMNS = ("REQUIREMENT", "CHECK", "VERDICT", "PROBE")


def _one_line(text: str) -> str:
    return " ".join(text.split())


def render_report(report: ComplianceReport, fmt: str = "table") -> bytes:
    if fmt == "json":
        return (report.model_dump_json(indent=2) + "\n").encode("utf-8")
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")
    counts = " ".join(f"{v}={n}" for v, n in report.counts.items())
    lines = [
        f"target:    {report.target}",
        f"timestamp: {report.timestamp.isoformat()}",
        f"style:     {report.style}",
        f"reachable: {'yes' if report.reachable else 'no'}",
        f"verdicts:  {counts}",
        "",
    ]
    rows = [(_one_line(c.table_row), c.check_id, c.verdict, _one_line(c.probe_description)) for c in report.checks]
    widths = [max([len(h)] + [len(r[i]) for r in rows]) + 2 for i, h in enumerate(_COLUMNS[:3])]
    header = "".join(h.ljust(w) for h, w in zip(_COLUMNS, widths)) + _COLUMNS[3]
    lines.append(header)
    lines.append("-" * len(header))
    for check, row in zip(report.checks, rows):
        lines.append("".join(cell.ljust(w) for cell, w in zip(row, widths)) + row[3])
        lines.extend(f"    - {_one_line(e)}" for e in check.evidence)
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_table(text: str | bytes) -> ComplianceReport:
    """Read back a table rendering. Evidence survives only as flattened single lines."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.splitlines()
    meta = {}
    i = 0
    while i < len(lines) and lines[i].strip():
        key, _, value = lines[i].partition(":")
        meta[key.strip()] = value.strip()
        i += 1
    while i < len(lines) and not lines[i].startswith(_COLUMNS[0]):
        i += 1
    header = lines[i]
    starts = [header.index(h) for h in _COLUMNS]
    checks: list[dict] = []
    for line in lines[i + 2 :]:
        if line.startswith("    - "):
            checks[-1]["evidence"].append(line[6:])
        elif line.strip():
            cells = [line[a:b].strip() for a, b in zip(starts, starts[1:] + [None])]
            checks.append(
                {
                    "table_row": cells[0],
                    "check_id": cells[1],
                    "verdict": cells[2],
                    "probe_description": cells[3],
                    "evidence": [],
                }
            )
    counts = dict(pair.split("=") for pair in meta.get("verdicts", "").split())
    return ComplianceReport.model_validate(
        {
            "target": meta["target"],
            "timestamp": meta["timestamp"],
            "style": meta.get("style", "auto"),
            "reachable": meta.get("reachable", "yes") == "yes",
            "checks": checks,
            "counts": {k: int(v) for k, v in counts.items()},
        }
    )


def parse_json(data: str | bytes) -> ComplianceReport:
    return ComplianceReport.model_validate(json.loads(data))
