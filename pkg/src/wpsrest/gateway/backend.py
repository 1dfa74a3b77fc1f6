"""Client for the WPS backend and the cached process catalog built from it."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from typing import Callable

import httpx

from wpsrest.resources.links import ProcessSummary
from wpsrest.wps import (
    DescribeProcess,
    ExceptionReport,
    Execute,
    ExecuteResult,
    GetCapabilities,
    MalformedDocument,
    ProcessDescription,
    SchemaViolation,
    ServiceCapabilities,
    encode_kvp,
    encode_xml,
    parse_capabilities,
    parse_exception_report,
    parse_execute_response,
    parse_process_description,
)
from wpsrest.gateway.jobs import utc_now

log = logging.getLogger(__name__)


class BackendUnavailable(Exception):
    """The backend could not be reached or hung up."""


class BackendProtocolError(Exception):
    """The backend answered, but not with a readable WPS document."""


class BackendError(Exception):
    """The backend answered with an exception report."""

    def __init__(self, report: ExceptionReport):
        super().__init__(f"{report.code}: {report.entries[0].text or ''}")
        self.report = report


class WPSClient:
    def __init__(self, http: httpx.Client, endpoint: str):
        self.http = http
        self.endpoint = endpoint

    def _kvp_url(self, query: str) -> str:
        sep = "&" if "?" in self.endpoint else "?"
        return f"{self.endpoint}{sep}{query}"

    def _send(self, method: str, url: str, body: bytes | None = None) -> bytes:
        try:
            if method == "GET":
                response = self.http.get(url)
            else:
                response = self.http.post(url, content=body, headers={"Content-Type": "text/xml; charset=utf-8"})
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"{method} {url}: {exc}") from exc
        if response.status_code >= 400:
            # some servers send exception reports with an error status; accept those, reject the rest
            try:
                raise BackendError(parse_exception_report(response.content))
            except (MalformedDocument, SchemaViolation):
                raise BackendProtocolError(f"{method} {url}: HTTP {response.status_code}") from None
        return response.content

    @staticmethod
    def _read(body: bytes, parser):
        try:
            return parser(body)
        except (MalformedDocument, SchemaViolation) as first:
            try:
                report = parse_exception_report(body)
            except (MalformedDocument, SchemaViolation):
                raise BackendProtocolError(str(first)) from first
            raise BackendError(report) from None

    def get_capabilities(self) -> ServiceCapabilities:
        return self._read(self._send("GET", self._kvp_url(encode_kvp(GetCapabilities()))), parse_capabilities)

    def describe_process(self, identifier: str) -> ProcessDescription:
        url = self._kvp_url(encode_kvp(DescribeProcess((identifier,))))
        desc = self._read(self._send("GET", url), parse_process_description)
        if desc.identifier != identifier:
            raise BackendProtocolError(f"asked for {identifier!r}, got a description of {desc.identifier!r}")
        return desc

    def execute(self, req: Execute) -> ExecuteResult | ExceptionReport:
        body = self._send("POST", self.endpoint, encode_xml(req))
        try:
            return parse_execute_response(body)
        except (MalformedDocument, SchemaViolation) as exc:
            raise BackendProtocolError(str(exc)) from exc


@dataclass(frozen=True)
class Catalog:
    title: str
    provider: str
    processes: tuple[ProcessDescription, ...]
    fetched_at: datetime
    modified_at: datetime
    stale: bool = False

    def get(self, identifier: str) -> ProcessDescription | None:
        return next((p for p in self.processes if p.identifier == identifier), None)

    def summaries(self) -> tuple[ProcessSummary, ...]:
        return tuple(ProcessSummary(p.identifier, p.title, p.taxonomy_tags) for p in self.processes)

    def same_content(self, other: "Catalog") -> bool:
        return (self.title, self.provider, self.processes) == (other.title, other.provider, other.processes)


def fetch_catalog(client: WPSClient, now: datetime) -> Catalog:
    caps = client.get_capabilities()
    descs = tuple(client.describe_process(b.identifier) for b in caps.process_briefs)
    return Catalog(caps.title, caps.provider, descs, now, now)


class CatalogCache:
    """Process metadata with a time-to-live.

    Only one thread refreshes at a time; the others keep reading the previous
    snapshot. If a refresh fails and an older snapshot exists, that snapshot
    is served marked ``stale`` and the next attempt waits another TTL.
    """

    def __init__(self, client: WPSClient, ttl: float, clock: Callable[[], datetime] = utc_now):
        self.client = client
        self.ttl = timedelta(seconds=ttl)
        self.clock = clock
        self._snapshot: Catalog | None = None
        self._refreshing = threading.Lock()

    def _fresh(self, snap: Catalog | None) -> bool:
        return snap is not None and self.clock() - snap.fetched_at < self.ttl

    def current(self) -> Catalog:
        snap = self._snapshot
        if self._fresh(snap):
            return snap
        if not self._refreshing.acquire(blocking=snap is None):
            return snap
        try:
            snap = self._snapshot
            if self._fresh(snap):
                return snap
            now = self.clock()
            try:
                fresh = fetch_catalog(self.client, now)
            except (BackendUnavailable, BackendProtocolError, BackendError) as exc:
                if snap is None:
                    raise BackendUnavailable(f"process catalog unavailable: {exc}") from exc
                log.warning("catalog refresh failed, serving stale copy: %s", exc)
                self._snapshot = replace(snap, fetched_at=now, stale=True)
                return self._snapshot
            if snap is not None and snap.same_content(fresh):
                fresh = replace(fresh, modified_at=snap.modified_at)
            self._snapshot = fresh
            return fresh
        finally:
            self._refreshing.release()

    def peek(self) -> Catalog | None:
        """The last snapshot without triggering a refresh."""
        return self._snapshot
