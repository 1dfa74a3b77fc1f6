"""The mediator proper: HTTP requests on resources in, WPS operations out.

:class:`Gateway` knows nothing about the web framework. It takes a method,
a request target, headers and a body and returns a :class:`Response`, which
keeps it easy to drive from tests and from the FastAPI adapter alike.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Iterable, Mapping
from urllib.parse import parse_qsl, urlsplit

from pydantic import ValidationError

from wpsrest.gateway.backend import (
    BackendError,
    BackendProtocolError,
    BackendUnavailable,
    Catalog,
    CatalogCache,
    WPSClient,
)
from wpsrest.gateway.config import GatewayConfig
from wpsrest.gateway.inputs import InputError, JobRequest, validate_inputs, validate_outputs
from wpsrest.gateway.jobs import Job, JobStore, utc_now
from wpsrest.resources.links import ResourceState, TypedLink, links_for
from wpsrest.resources.negotiation import JSON, REPRESENTATIONS, MediaType, negotiate
from wpsrest.resources.render import ProcessList, Representation, render
from wpsrest.resources.uris import ENTRY, PROCESSES, NotFound, ResourceId, route, uri_for
from wpsrest.semantics import (
    CachePolicy,
    Conditional,
    Problem,
    StatusMapping,
    compute_etag,
    evaluate_conditional,
    map_exception,
    method_guard,
)
from wpsrest.wps.models import (
    BBoxValue,
    ComplexValue,
    ExceptionReport,
    Execute,
    ExecuteResult,
    LiteralValue,
)

log = logging.getLogger(__name__)

_CONTENT_TYPES = {
    "application/json": "application/json",
    "application/xml": "application/xml; charset=utf-8",
    "text/html": "text/html; charset=utf-8",
    "text/plain": "text/plain; charset=utf-8",
}


@dataclass
class Response:
    status: int
    headers: list[tuple[str, str]] = field(default_factory=list)
    body: bytes = b""

    def header(self, name: str) -> str | None:
        name = name.lower()
        return next((v for k, v in self.headers if k.lower() == name), None)


class _Fail(Exception):
    """Short-circuits a handler with a finished problem response."""

    def __init__(self, response: Response):
        self.response = response


def _content_type(media: str) -> str:
    return _CONTENT_TYPES.get(media, media)


class Gateway:
    def __init__(
        self,
        config: GatewayConfig,
        backend: WPSClient,
        store: JobStore | None = None,
        clock: Callable[[], datetime] = utc_now,
    ):
        self.config = config
        self.base = config.base_uri.rstrip("/")
        self.base_path = urlsplit(self.base).path.rstrip("/")
        self.backend = backend
        self.store = store if store is not None else JobStore(config.journal)
        self.clock = clock
        self.started_at = clock()
        self.catalog = CatalogCache(backend, config.cache_ttl, clock)
        self.mapping = StatusMapping.default(config.retry_after)
        self.cache = CachePolicy.default()

    # -- entry point ---------------------------------------------------------

    def handle(self, method: str, target: str, headers: Mapping[str, str] | Iterable, body: bytes = b"") -> Response:
        method = method.upper()
        items = headers.items() if hasattr(headers, "items") else headers
        hdrs = {k.lower(): v for k, v in items}
        parts = urlsplit(target)
        path = parts.path or "/"
        if self.base_path and (path == self.base_path or path.startswith(self.base_path + "/")):
            path = path[len(self.base_path) :] or "/"
        accept = hdrs.get("accept")
        try:
            try:
                rid = route(path)
            except NotFound:
                raise _Fail(self._problem(404, "NotFound", path, f"no resource at {path}", accept, path=path))
            if parts.query:
                names = [k for k, _ in parse_qsl(parts.query, keep_blank_values=True)] or [parts.query]
                raise _Fail(
                    self._problem(
                        400,
                        "InvalidParameterValue",
                        names[0],
                        "query parameters are not part of this interface; "
                        "operations are HTTP methods on the resource URIs",
                        accept,
                        rid=rid,
                    )
                )
            decision = method_guard(rid, method)
            if not decision.allowed:
                raise _Fail(
                    self._problem(
                        405,
                        "MethodNotAllowed",
                        method,
                        f"{method} is not allowed here; use {decision.allow_header}",
                        accept,
                        rid=rid,
                        headers=[("Allow", decision.allow_header)],
                    )
                )
            if method == "GET":
                return self._get(rid, hdrs)
            if method == "POST":
                return self._create_job(rid, hdrs, body)
            return self._delete_job(rid, hdrs)
        except _Fail as fail:
            return fail.response

    # -- helpers -------------------------------------------------------------

    def _uri(self, rid: ResourceId) -> str:
        return uri_for(rid, self.base)

    def _media(self, accept: str | None, rid: ResourceId, offers=REPRESENTATIONS) -> MediaType:
        chosen = negotiate(accept, offers)
        if chosen is None:
            names = ", ".join(str(o) for o in offers)
            raise _Fail(
                self._problem(
                    406, "NotAcceptable", "Accept", f"available representations: {names}", None, rid=rid
                )
            )
        return chosen

    def _problem(
        self,
        status: int,
        code: str,
        locator: str | None,
        text: str,
        accept: str | None,
        *,
        rid: ResourceId | None = None,
        path: str | None = None,
        headers: Iterable[tuple[str, str]] = (),
        links: Iterable[TypedLink] = (),
        report: ExceptionReport | None = None,
    ) -> Response:
        report = report or ExceptionReport.single(code, locator, text)
        problem = Problem(status, report)
        self_href = self.base + path if rid is None else self._uri(rid)
        all_links = [TypedLink("self", self_href)]
        if rid is None or rid.kind != "entry":
            all_links.append(TypedLink("up", self._uri(ENTRY)))
        all_links.extend(links)
        media = negotiate(accept, REPRESENTATIONS) or JSON
        rep = render(rid or ENTRY, problem, media.name, all_links)
        out = [
            ("Content-Type", _content_type(rep.media_type)),
            ("Cache-Control", "no-store"),
            ("Vary", "Accept"),
            *headers,
        ]
        return Response(status, out, rep.body)

    def _catalog(self, accept: str | None, rid: ResourceId) -> Catalog:
        try:
            return self.catalog.current()
        except BackendUnavailable as exc:
            raise _Fail(
                self._problem(
                    503,
                    "NoApplicableCode",
                    None,
                    f"the processing backend is unavailable: {exc}",
                    accept,
                    rid=rid,
                    headers=[("Retry-After", str(self.config.retry_after))],
                )
            ) from None

    def _summaries(self):
        snap = self.catalog.peek()
        return snap.summaries() if snap is not None else ()

    def _respond(self, rid: ResourceId, rep: Representation, hdrs: Mapping[str, str], extra=()) -> Response:
        rule = self.cache.rule(rid.kind)
        cache_headers = self.cache.headers(rid.kind, rep.etag, rep.last_modified)
        verdict = evaluate_conditional(
            hdrs.get("if-none-match"),
            hdrs.get("if-modified-since"),
            rep.etag if rule.etag else None,
            rep.last_modified if rule.last_modified else None,
        )
        common = [("Vary", "Accept"), *cache_headers, *extra]
        if verdict is Conditional.NOT_MODIFIED:
            return Response(304, common)
        link_header = f'<{rep.self_link.href}>; rel="self"'
        return Response(
            200,
            [("Content-Type", _content_type(rep.media_type)), ("Link", link_header), *common],
            rep.body,
        )

    # -- GET -----------------------------------------------------------------

    def _get(self, rid: ResourceId, hdrs: Mapping[str, str]) -> Response:
        accept = hdrs.get("accept")
        if rid.kind == "job_result":
            return self._get_result(rid, hdrs)
        media = self._media(accept, rid)
        extra: list[tuple[str, str]] = []
        kind = rid.kind
        if kind == "entry":
            obj = {
                "title": "Geoprocessing services",
                "description": "Processes offered by a WPS backend, exposed as web resources.",
            }
            links = links_for(rid, self.base)
            modified = self.started_at
        elif kind in ("process_collection", "process"):
            catalog = self._catalog(accept, rid)
            if catalog.stale:
                extra.append(("Warning", '110 - "Response is Stale"'))
            state = ResourceState(processes=catalog.summaries())
            links = links_for(rid, self.base, state)
            modified = catalog.modified_at
            if kind == "process_collection":
                obj = ProcessList(catalog.title, catalog.provider, self._uri(PROCESSES), catalog.processes)
            else:
                obj = catalog.get(rid.key)
                if obj is None:
                    raise _Fail(self._problem(404, "NotFound", rid.key, f"no process named {rid.key!r}", accept, rid=rid))
        elif kind == "job_collection":
            if rid.key is not None and self._catalog(accept, rid).get(rid.key) is None:
                raise _Fail(self._problem(404, "NotFound", rid.key, f"no process named {rid.key!r}", accept, rid=rid))
            jobs = self.store.list(rid.key)
            obj = {"jobs": [{"id": j.id, "process": j.process_id, "status": j.status} for j in jobs]}
            links = links_for(rid, self.base, ResourceState(job_ids=tuple(j.id for j in jobs)))
            modified = max((j.updated_at for j in jobs), default=self.started_at)
        else:
            job = self._job(rid, accept)
            obj = job
            links = links_for(rid, self.base, self._job_state(job))
            modified = job.updated_at
        rep = render(rid, obj, media.name, links, modified)
        return self._respond(rid, rep, hdrs, extra)

    def _job(self, rid: ResourceId, accept: str | None) -> Job:
        job = self.store.get(rid.key)
        if job is None:
            raise _Fail(self._problem(404, "NotFound", rid.key, f"no job {rid.key!r}", accept, rid=rid))
        return job

    def _job_state(self, job: Job) -> ResourceState:
        return ResourceState(processes=self._summaries(), job_status=job.status, job_process=job.process_id)

    def _get_result(self, rid: ResourceId, hdrs: Mapping[str, str]) -> Response:
        accept = hdrs.get("accept")
        job = self._job(ResourceId("job", rid.key), accept)
        if job.status != "succeeded":
            raise _Fail(
                self._problem(
                    404,
                    "NotFound",
                    rid.key,
                    f"job {rid.key!r} has no result (status: {job.status})",
                    accept,
                    rid=rid,
                    links=[TypedLink("monitor", self._uri(ResourceId("job", job.id)))],
                )
            )
        result: ExecuteResult = job.result
        wanted = job.outputs[0] if job.outputs else result.outputs[0][0]
        value = result.output(wanted)
        if isinstance(value, ComplexValue) and value.href is not None:
            return Response(303, [("Location", value.href), ("Cache-Control", "no-cache")])
        declared = self._declared_formats(job.process_id, wanted)
        bodies = _result_bodies(value)
        offers = [m for m in declared if m in bodies] or list(bodies)
        media = self._media(accept, rid, offers)
        body = bodies[media.name]
        links = links_for(rid, self.base)
        rep = Representation(media.name, body, tuple(links), compute_etag(body), job.updated_at)
        response = self._respond(rid, rep, hdrs)
        link_header = ", ".join(f'<{link.href}>; rel="{link.rel}"' for link in links)
        response.headers = [(k, link_header if k == "Link" else v) for k, v in response.headers]
        return response

    def _declared_formats(self, process_id: str, output_id: str) -> tuple[str, ...]:
        snap = self.catalog.peek()
        desc = snap.get(process_id) if snap is not None else None
        if desc is None or desc.output(output_id) is None:
            return ()
        return desc.output(output_id).supported_formats

    # -- POST ----------------------------------------------------------------

    def _create_job(self, rid: ResourceId, hdrs: Mapping[str, str], body: bytes) -> Response:
        accept = hdrs.get("accept")
        media = self._media(accept, rid)
        try:
            doc = json.loads(body or b"{}")
            req = JobRequest.model_validate(doc)
        except (ValueError, ValidationError) as exc:
            text = f"the request body must be a JSON job request: {exc}".splitlines()[0]
            raise _Fail(self._problem(400, "InvalidParameterValue", "body", text, accept, rid=rid)) from None
        pid = rid.key or req.process
        if pid is None:
            raise _Fail(
                self._problem(400, "MissingParameterValue", "process", "name the process to run", accept, rid=rid)
            )
        if rid.key is not None and req.process not in (None, rid.key):
            raise _Fail(
                self._problem(
                    400, "InvalidParameterValue", "process", "process does not match the collection", accept, rid=rid
                )
            )
        catalog = self._catalog(accept, rid)
        desc = catalog.get(pid)
        if desc is None:
            raise _Fail(self._problem(404, "NotFound", pid, f"no process named {pid!r}", accept, rid=rid))
        try:
            inputs = validate_inputs(req.inputs.items(), desc.inputs)
            outputs = validate_outputs(req.outputs, desc)
        except InputError as exc:
            status, extra, _ = map_exception(ExceptionReport.single(exc.code, exc.locator, exc.text), self.mapping)
            raise _Fail(self._problem(status, exc.code, exc.locator, exc.text, accept, rid=rid, headers=extra)) from None

        job = self.store.insert(Job.accepted(pid, inputs, outputs, at=self.clock()))
        job = self.store.update(job.id, lambda j: j.advance("running", at=self.clock()))
        job_rid = ResourceId("job", job.id)
        try:
            outcome = self.backend.execute(Execute(pid, inputs))
        except BackendError as exc:
            outcome = exc.report
        except (BackendUnavailable, BackendProtocolError) as exc:
            log.warning("execute %s failed at the transport level: %s", pid, exc)
            report = ExceptionReport.single("NoApplicableCode", None, f"the processing backend failed: {exc}")
            self._fail_job(job, report)
            raise _Fail(
                self._problem(
                    502,
                    report.code,
                    None,
                    "",
                    accept,
                    rid=rid,
                    report=report,
                    links=[TypedLink("monitor", self._uri(job_rid))],
                )
            ) from None
        if isinstance(outcome, ExceptionReport):
            self._fail_job(job, outcome)
            status, extra, _ = map_exception(outcome, self.mapping)
            process_links = links_for(ResourceId("process", pid), self.base, ResourceState(catalog.summaries()))
            similar = [link for link in process_links if link.rel == "similar"]
            raise _Fail(
                self._problem(
                    status,
                    outcome.code,
                    None,
                    "",
                    accept,
                    rid=rid,
                    report=outcome,
                    headers=extra,
                    links=[TypedLink("monitor", self._uri(job_rid)), *similar],
                )
            )
        job = self.store.update(job.id, lambda j: j.advance("succeeded", at=self.clock(), result=outcome))
        rep = render(job_rid, job, media.name, links_for(job_rid, self.base, self._job_state(job)), job.updated_at)
        location = self._uri(job_rid)
        return Response(
            201,
            [
                ("Content-Type", _content_type(rep.media_type)),
                ("Location", location),
                ("Content-Location", location),
                ("Cache-Control", "no-cache"),
                ("ETag", rep.etag),
                ("Vary", "Accept"),
            ],
            rep.body,
        )

    def _fail_job(self, job: Job, report: ExceptionReport) -> Job:
        return self.store.update(job.id, lambda j: j.advance("failed", at=self.clock(), exception=report))

    # -- DELETE --------------------------------------------------------------

    def _delete_job(self, rid: ResourceId, hdrs: Mapping[str, str]) -> Response:
        if not self.store.delete(rid.key):
            raise _Fail(self._problem(404, "NotFound", rid.key, f"no job {rid.key!r}", hdrs.get("accept"), rid=rid))
        return Response(204, [("Cache-Control", "no-store")])


def _result_bodies(value) -> dict[str, bytes]:
    """The encodings a single output value can be served in, keyed by media type."""
    if isinstance(value, LiteralValue):
        if value.datatype == "double":
            as_json = json.dumps(float(value.text))
        elif value.datatype == "integer":
            as_json = json.dumps(int(value.text))
        else:
            as_json = json.dumps(value.text, ensure_ascii=False)
        return {"text/plain": value.text.encode("utf-8"), "application/json": as_json.encode("utf-8")}
    if isinstance(value, BBoxValue):
        doc = json.dumps({"crs": value.crs, "bbox": list(value.bounds)}, separators=(",", ":"))
        return {"application/json": doc.encode("utf-8")}
    return {value.media_type: value.body}

