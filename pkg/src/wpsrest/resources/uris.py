"""Resource identifiers and the URI scheme that names them.

=================  ===============================
kind               path
=================  ===============================
entry              ``/``
process_collection ``/processes``
process            ``/processes/{pid}``
job_collection     ``/jobs`` or ``/processes/{pid}/jobs``
job                ``/jobs/{jid}``
job_result         ``/jobs/{jid}/result``
=================  ===============================

Keys are percent-encoded as a single path segment, so identifiers holding
``/`` or spaces still map to exactly one URI.
"""

from __future__ import annotations

from dataclasses import dataclass
from urllib.parse import quote, unquote

KINDS = ("entry", "process_collection", "process", "job_collection", "job", "job_result")
_KEYED = {"process", "job", "job_result"}


class NotFound(LookupError):
    pass


@dataclass(frozen=True)
class ResourceId:
    kind: str
    key: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown resource kind {self.kind!r}")
        if self.key is not None and (not isinstance(self.key, str) or not self.key):
            raise ValueError("resource keys must be non-empty strings")
        if self.kind in _KEYED and self.key is None:
            raise ValueError(f"{self.kind} resources need a key")
        # a keyed job collection is the one scoped to a single process
        if self.kind not in _KEYED and self.kind != "job_collection" and self.key is not None:
            raise ValueError(f"{self.kind} resources take no key")


ENTRY = ResourceId("entry")
PROCESSES = ResourceId("process_collection")
JOBS = ResourceId("job_collection")


def _seg(key: str) -> str:
    return quote(key, safe="")


def path_for(rid: ResourceId) -> str:
    kind, key = rid.kind, rid.key
    if kind == "entry":
        return "/"
    if kind == "process_collection":
        return "/processes"
    if kind == "process":
        return f"/processes/{_seg(key)}"
    if kind == "job_collection":
        return "/jobs" if key is None else f"/processes/{_seg(key)}/jobs"
    if kind == "job":
        return f"/jobs/{_seg(key)}"
    return f"/jobs/{_seg(key)}/result"


def uri_for(rid: ResourceId, base: str) -> str:
    """Absolute URI of ``rid`` under ``base`` (which may carry a path prefix)."""
    return base.rstrip("/") + path_for(rid)


def route(path: str) -> ResourceId:
    """Inverse of :func:`path_for`; raises NotFound for anything off the scheme."""
    if path == "/":
        return ENTRY
    if not path.startswith("/"):
        raise NotFound(path)
    segments = path[1:].split("/")
    if any(not s for s in segments):
        raise NotFound(path)
    keys = [unquote(s) for s in segments]
    match keys:
        case ["processes"]:
            return PROCESSES
        case ["processes", pid]:
            return ResourceId("process", pid)
        case ["processes", pid, "jobs"]:
            return ResourceId("job_collection", pid)
        case ["jobs"]:
            return JOBS
        case ["jobs", jid]:
            return ResourceId("job", jid)
        case ["jobs", jid, "result"]:
            return ResourceId("job_result", jid)
    raise NotFound(path)
