"""REST-conformance auditor for WPS-style endpoints."""

from wpsrest.auditor.audit import STYLES, run_audit
from wpsrest.auditor.report import (
    RANK,
    VERDICTS,
    ComplianceCheck,
    ComplianceReport,
    parse_json,
    parse_table,
    render_report,
)

__all__ = [
    "RANK",
    "STYLES",
    "VERDICTS",
    "ComplianceCheck",
    "ComplianceReport",
    "parse_json",
    "parse_table",
    "render_report",
    "run_audit",
]
