"""Jobs (one per execution) and the store that keeps them.

The store is an in-memory map guarded by one lock. With a journal path it
also appends every change as a line of JSON: a full job snapshot, or a
``{"id": ..., "deleted": true}`` tombstone. Replaying the file on startup
rebuilds the map; a torn last line from a crash is skipped.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import secrets
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable

from wpsrest.resources.render import to_data
from wpsrest.wps.models import (
    BBoxValue,
    ComplexValue,
    DataValue,
    ExceptionEntry,
    ExceptionReport,
    ExecuteResult,
    LiteralValue,
)

log = logging.getLogger(__name__)

STATES = ("accepted", "running", "succeeded", "failed")
_NEXT = {"accepted": ("running",), "running": ("succeeded", "failed"), "succeeded": (), "failed": ()}


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def new_job_id() -> str:
    """128 random bits, URL-safe."""
    return secrets.token_urlsafe(16)


class InvalidTransition(ValueError):
    pass


@dataclass(frozen=True)
class Job:
    id: str
    process_id: str
    inputs: tuple[tuple[str, DataValue], ...]
    status: str
    created_at: datetime
    updated_at: datetime
    result: ExecuteResult | None = None
    exception: ExceptionReport | None = None
    outputs: tuple[str, ...] = ()

    def __post_init__(self):
        if self.status not in STATES:
            raise ValueError(f"unknown job status {self.status!r}")
        if (self.result is not None) != (self.status == "succeeded"):
            raise ValueError("a job has a result exactly when it succeeded")
        if (self.exception is not None) != (self.status == "failed"):
            raise ValueError("a job has an exception exactly when it failed")

    @classmethod
    def accepted(cls, process_id: str, inputs, outputs=(), *, at: datetime | None = None) -> "Job":
        at = at or utc_now()
        return cls(new_job_id(), process_id, tuple(inputs), "accepted", at, at, outputs=tuple(outputs))

    def advance(self, status: str, *, at: datetime | None = None, result=None, exception=None) -> "Job":
        if status not in _NEXT[self.status]:
            raise InvalidTransition(f"job {self.id}: {self.status} -> {status} is not allowed")
        return replace(self, status=status, updated_at=at or utc_now(), result=result, exception=exception)

    @property
    def terminal(self) -> bool:
        return self.status in ("succeeded", "failed")


# -- JSON form ---------------------------------------------------------------


def value_to_json(value: DataValue) -> dict:
    if isinstance(value, LiteralValue):
        return {"literal": value.text, "dataType": value.datatype}
    if isinstance(value, BBoxValue):
        return {"bbox": list(value.bounds), "crs": value.crs}
    if value.href is not None:
        return {"mimeType": value.media_type, "href": value.href}
    return {"mimeType": value.media_type, "body": base64.b64encode(value.body).decode("ascii")}


def value_from_json(doc: dict) -> DataValue:
    if "literal" in doc:
        return LiteralValue(doc["literal"], doc["dataType"])
    if "bbox" in doc:
        return BBoxValue(*doc["bbox"], crs=doc["crs"])
    if "href" in doc:
        return ComplexValue(doc["mimeType"], href=doc["href"])
    return ComplexValue(doc["mimeType"], body=base64.b64decode(doc["body"]))


def _pairs_to_json(pairs) -> list:
    return [{"id": ident, "value": value_to_json(v)} for ident, v in pairs]


def _pairs_from_json(items) -> tuple:
    return tuple((item["id"], value_from_json(item["value"])) for item in items)


def job_to_json(job: Job) -> dict:
    return {
        "id": job.id,
        "process": job.process_id,
        "status": job.status,
        "created": job.created_at.isoformat(),
        "updated": job.updated_at.isoformat(),
        "inputs": _pairs_to_json(job.inputs),
        "outputs": list(job.outputs),
        "result": None
        if job.result is None
        else {"process": job.result.process_id, "outputs": _pairs_to_json(job.result.outputs)},
        "exception": None
        if job.exception is None
        else [{"code": e.code, "locator": e.locator, "text": e.text} for e in job.exception.entries],
    }


def job_from_json(doc: dict) -> Job:
    result = doc.get("result")
    exc = doc.get("exception")
    return Job(
        id=doc["id"],
        process_id=doc["process"],
        inputs=_pairs_from_json(doc["inputs"]),
        status=doc["status"],
        created_at=datetime.fromisoformat(doc["created"]),
        updated_at=datetime.fromisoformat(doc["updated"]),
        result=None if result is None else ExecuteResult(result["process"], _pairs_from_json(result["outputs"])),
        exception=None
        if exc is None
        else ExceptionReport(tuple(ExceptionEntry(e["code"], e.get("locator"), e.get("text")) for e in exc)),
        outputs=tuple(doc.get("outputs", ())),
    )


@to_data.register
def _(job: Job):
    return job_to_json(job)


# -- store -------------------------------------------------------------------


@dataclass
class JobStore:
    journal: Path | None = None
    _jobs: dict[str, Job] = field(default_factory=dict, init=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, init=False)

    def __post_init__(self):
        if self.journal is not None:
            self.journal = Path(self.journal)
            if self.journal.exists():
                self._jobs = dict(replay(self.journal))
                log.info("replayed %d jobs from %s", len(self._jobs), self.journal)

    def _append(self, record: dict) -> None:
        if self.journal is None:
            return
        line = json.dumps(record, separators=(",", ":"), sort_keys=True)
        with self.journal.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()

    def insert(self, job: Job) -> Job:
        with self._lock:
            if job.id in self._jobs:
                raise KeyError(f"duplicate job id {job.id}")
            self._append(job_to_json(job))
            self._jobs[job.id] = job
            return job

    def update(self, job_id: str, change: Callable[[Job], Job]) -> Job:
        """Atomically replace a job with ``change(job)``."""
        with self._lock:
            current = self._jobs[job_id]
            updated = change(current)
            if updated.id != current.id:
                raise ValueError("a job update cannot change the job id")
            self._append(job_to_json(updated))
            self._jobs[job_id] = updated
            return updated

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def delete(self, job_id: str) -> bool:
        with self._lock:
            if job_id not in self._jobs:
                return False
            self._append({"id": job_id, "deleted": True})
            del self._jobs[job_id]
            return True

    def list(self, process_id: str | None = None) -> list[Job]:
        with self._lock:
            jobs = list(self._jobs.values())
        if process_id is not None:
            jobs = [j for j in jobs if j.process_id == process_id]
        return sorted(jobs, key=lambda j: (j.created_at, j.id))

    def __len__(self) -> int:
        with self._lock:
            return len(self._jobs)

    def digest(self) -> str:
        """Content hash of every stored job, for before/after comparisons."""
        with self._lock:
            docs = [job_to_json(self._jobs[k]) for k in sorted(self._jobs)]
        return hashlib.sha256(json.dumps(docs, sort_keys=True).encode()).hexdigest()


def replay(path: Path) -> Iterable[tuple[str, Job]]:
    jobs: dict[str, Job] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                if doc.get("deleted"):
                    jobs.pop(doc["id"], None)
                else:
                    job = job_from_json(doc)
                    jobs[job.id] = job
            except (ValueError, KeyError, TypeError) as exc:
                log.warning("skipping unreadable journal line %d in %s: %s", lineno, path, exc)
    return jobs.items()
