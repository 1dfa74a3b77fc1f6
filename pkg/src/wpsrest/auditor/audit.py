"""Run the probe battery against one target."""

from __future__ import annotations

import logging
from datetime import datetime, timezone
from urllib.parse import urlsplit

import httpx

from wpsrest.auditor.probes import CHECKS, NOT_PROBED, PROBES, Context, Session, with_query
from wpsrest.auditor.report import ComplianceCheck, ComplianceReport
from wpsrest.wps import GetCapabilities, encode_kvp

log = logging.getLogger(__name__)

STYLES = ("auto", "raw-wps", "resource")


def _not_probed() -> list[ComplianceCheck]:
    return [
        ComplianceCheck(check_id=c, table_row=CHECKS[c][0], probe_description=CHECKS[c][1], verdict="not-probed")
        for c in NOT_PROBED
    ]


def _all_error(reason: str) -> list[ComplianceCheck]:
    return [
        ComplianceCheck(
            check_id=c, table_row=CHECKS[c][0], probe_description=CHECKS[c][1], verdict="error", evidence=[reason]
        )
        for c in PROBES
    ]


def detect_style(session: Session, target: str) -> str:
    """Resource style if the target's own representation carries typed links."""
    page = session.get(target)
    return "resource" if page.links else "raw-wps"


def run_audit(
    target: str, style: str = "auto", client: httpx.Client | None = None, timeout: float = 10.0
) -> ComplianceReport:
    parts = urlsplit(target)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise ValueError(f"target must be an absolute http(s) URI: {target!r}")
    if not parts.path:
        target = parts._replace(path="/").geturl()
    if style not in STYLES:
        raise ValueError(f"unknown entry style {style!r}")
    own_client = client is None
    client = client or httpx.Client(timeout=timeout)
    started = datetime.now(timezone.utc)
    try:
        session = Session(client)
        try:
            resolved = detect_style(session, target) if style == "auto" else style
        except httpx.TransportError as exc:
            return ComplianceReport(
                target=target,
                timestamp=started,
                style=style,
                reachable=False,
                checks=_all_error(f"target unreachable: {exc!r}") + _not_probed(),
            )
        entry = with_query(target, encode_kvp(GetCapabilities())) if resolved == "raw-wps" else target
        ctx = Context(session, target, resolved, entry)
        checks = []
        for check_id, probe in PROBES.items():
            try:
                checks.append(probe(ctx))
            except httpx.TransportError as exc:
                log.warning("probe %s failed: %r", check_id, exc)
                checks.append(
                    ComplianceCheck(
                        check_id=check_id,
                        table_row=CHECKS[check_id][0],
                        probe_description=CHECKS[check_id][1],
                        verdict="error",
                        evidence=[f"transport failure: {exc!r}"],
                    )
                )
        return ComplianceReport(target=target, timestamp=started, style=resolved, checks=checks + _not_probed())
    finally:
        if own_client:
            client.close()

