"""HTTP as an application protocol: status mapping, cache validators, verb rules."""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from email.utils import format_datetime, parsedate_to_datetime
from types import MappingProxyType
from typing import TYPE_CHECKING, Mapping

from wpsrest.wps.models import ExceptionEntry, ExceptionReport

if TYPE_CHECKING:
    from wpsrest.resources.uris import ResourceId

DEFAULT_RETRY_AFTER = 30

Headers = tuple[tuple[str, str], ...]


# -- exception codes -> status ----------------------------------------------


@dataclass(frozen=True)
class StatusMapping:
    table: Mapping[str, tuple[int, Headers]]
    fallback: int = 500

    def __post_init__(self):
        for code, (status, _) in self.table.items():
            if not 100 <= status <= 599:
                raise ValueError(f"status {status} for {code!r} is outside [100, 599]")
        if not 100 <= self.fallback <= 599:
            raise ValueError("fallback status outside [100, 599]")
        object.__setattr__(self, "table", MappingProxyType(dict(self.table)))

    @classmethod
    def default(cls, retry_after: int = DEFAULT_RETRY_AFTER) -> "StatusMapping":
        return cls(
            {
                "MissingParameterValue": (400, ()),
                "InvalidParameterValue": (400, ()),
                "ServerBusy": (503, (("Retry-After", str(retry_after)),)),
                "NoApplicableCode": (500, ()),
            }
        )

    def lookup(self, code: str) -> tuple[int, Headers]:
        return self.table.get(code, (self.fallback, ()))


@dataclass(frozen=True)
class Problem:
    """Client-facing description of a failure, ready to be rendered."""

    status: int
    report: ExceptionReport

    @property
    def first(self) -> ExceptionEntry:
        return self.report.entries[0]

    def to_data(self) -> dict:
        first = self.first
        return {
            "status": self.status,
            "code": first.code,
            "locator": first.locator,
            "text": first.text,
            "exceptions": [
                {"code": e.code, "locator": e.locator, "text": e.text} for e in self.report.entries
            ],
        }


def map_exception(report: ExceptionReport, mapping: StatusMapping | None = None) -> tuple[int, Headers, Problem]:
    """Translate a WPS exception report into a status, extra headers and a problem.

    The first entry decides the status; unknown codes fall back to 500.
    """
    mapping = mapping or StatusMapping.default()
    status, headers = mapping.lookup(report.code)
    return status, headers, Problem(status, report)


# -- cache validators --------------------------------------------------------


def compute_etag(body: bytes) -> str:
    """Strong validator: the quoted SHA-256 hex digest of the body."""
    return '"' + hashlib.sha256(body).hexdigest() + '"'


def http_date(moment: datetime) -> str:
    """IMF-fixdate rendering, e.g. ``Sun, 06 Nov 1994 08:49:37 GMT``."""
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return format_datetime(moment.astimezone(timezone.utc).replace(microsecond=0), usegmt=True)


def parse_http_date(value: str | None) -> datetime | None:
    if not value:
        return None
    try:
        moment = parsedate_to_datetime(value)
    except (TypeError, ValueError, IndexError):
        return None
    if moment is None:
        return None
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment


class Conditional(str, enum.Enum):
    FULL = "full"
    NOT_MODIFIED = "not_modified"


def _opaque(tag: str) -> str:
    tag = tag.strip()
    return tag[2:] if tag.startswith("W/") else tag


def evaluate_conditional(
    if_none_match: str | None,
    if_modified_since: str | None,
    current_etag: str | None,
    current_last_modified: datetime | None,
) -> Conditional:
    """Decide between a full response and 304.

    If-None-Match, when present, decides alone (weak comparison, ``*``
    matches anything). Otherwise If-Modified-Since is compared at one-second
    resolution; an unreadable date counts as absent.
    """
    if if_none_match is not None and if_none_match.strip():
        tags = [t for t in (p.strip() for p in if_none_match.split(",")) if t]
        if current_etag is not None and any(t == "*" or _opaque(t) == _opaque(current_etag) for t in tags):
            return Conditional.NOT_MODIFIED
        return Conditional.FULL
    since = parse_http_date(if_modified_since)
    if since is not None and current_last_modified is not None:
        modified = current_last_modified
        if modified.tzinfo is None:
            modified = modified.replace(tzinfo=timezone.utc)
        if since >= modified.replace(microsecond=0):
            return Conditional.NOT_MODIFIED
    return Conditional.FULL


@dataclass(frozen=True)
class CacheRule:
    directive: str
    validators: str  # etag | last-modified | both | none

    @property
    def etag(self) -> bool:
        return self.validators in ("etag", "both")

    @property
    def last_modified(self) -> bool:
        return self.validators in ("last-modified", "both")


_NEVER_STALE_KINDS = ("job", "job_collection")


def _max_age(directive: str) -> int:
    for part in directive.split(","):
        key, _, value = part.strip().partition("=")
        if key.lower() in ("max-age", "s-maxage"):
            try:
                return int(value)
            except ValueError:
                return 0
    return 0


@dataclass(frozen=True)
class CachePolicy:
    rules: Mapping[str, CacheRule] = field(default_factory=dict)

    def __post_init__(self):
        for kind, rule in self.rules.items():
            if rule.validators not in ("etag", "last-modified", "both", "none"):
                raise ValueError(f"unknown validator set {rule.validators!r}")
            if kind in _NEVER_STALE_KINDS and _max_age(rule.directive) > 0:
                raise ValueError(f"{kind} representations must not be cached with a positive max-age")
        object.__setattr__(self, "rules", MappingProxyType(dict(self.rules)))

    @classmethod
    def default(cls) -> "CachePolicy":
        stable = CacheRule("max-age=3600", "both")
        return cls(
            {
                "entry": stable,
                "process_collection": stable,
                "process": stable,
                "job_collection": CacheRule("no-cache", "etag"),
                "job": CacheRule("no-cache", "etag"),
                "job_result": CacheRule("max-age=86400", "both"),
            }
        )

    def rule(self, kind: str) -> CacheRule:
        return self.rules.get(kind, CacheRule("no-store", "none"))

    def headers(self, kind: str, etag: str | None, last_modified: datetime | None) -> list[tuple[str, str]]:
        rule = self.rule(kind)
        out = [("Cache-Control", rule.directive)]
        if rule.etag and etag:
            out.append(("ETag", etag))
        if rule.last_modified and last_modified is not None:
            out.append(("Last-Modified", http_date(last_modified)))
        return out


# -- verbs -------------------------------------------------------------------

_ALLOWED = {
    "entry": ("GET",),
    "process_collection": ("GET",),
    "process": ("GET",),
    "job_result": ("GET",),
    "job_collection": ("GET", "POST"),
    "job": ("GET", "DELETE"),
}


@dataclass(frozen=True)
class MethodDecision:
    allowed: bool
    allow: tuple[str, ...]

    @property
    def allow_header(self) -> str:
        return ", ".join(self.allow)


def method_guard(rid: ResourceId, method: str) -> MethodDecision:
    allow = _ALLOWED[rid.kind]
    return MethodDecision(method.upper() in allow, allow)
