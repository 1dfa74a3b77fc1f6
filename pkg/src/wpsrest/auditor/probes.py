"""The probe battery. Each probe issues a few HTTP requests and returns one check.

Probes only use GET, a no-op merge-patch, and POSTs of deliberately invalid
job requests (or read-only WPS documents); any job a probe does create is
deleted before the probe returns.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Callable
from urllib.parse import urldefrag, urlsplit

import httpx

from wpsrest.auditor.report import ComplianceCheck
from wpsrest.resources.links import TypedLink, parse_links
from wpsrest.wps import (
    BBoxValue,
    DescribeProcess,
    Execute,
    ExecuteResult,
    GetCapabilities,
    LiteralValue,
    WPSProtocolError,
    encode_kvp,
    encode_xml,
    parse_capabilities,
    parse_exception_report,
    parse_execute_response,
    parse_process_description,
)

log = logging.getLogger(__name__)

DEFAULT_ACCEPT = "application/json, application/xml;q=0.9, text/html;q=0.8, */*;q=0.1"
BOGUS_TYPE = "application/x-unsupported-probe"
MAX_HOPS = 3
MAX_PAGES = 100


@dataclass(frozen=True)
class Fetched:
    method: str
    url: str
    status: int
    headers: httpx.Headers
    body: bytes

    @property
    def media_type(self) -> str:
        return (self.headers.get("content-type") or "").split(";")[0].strip().lower()

    @property
    def links(self) -> list[TypedLink]:
        return parse_links(self.body, self.headers.get("content-type"), self.url)

    def rel(self, rel: str) -> list[TypedLink]:
        return [link for link in self.links if link.rel == rel]

    def excerpt(self, n: int = 100) -> str:
        text = " ".join(self.body[:n].decode("utf-8", errors="replace").split())
        return text + ("..." if len(self.body) > n else "")

    def line(self, *names: str) -> str:
        out = f"{self.method} {self.url} -> {self.status}"
        if self.media_type:
            out += f" {self.media_type}"
        for name in names:
            value = self.headers.get(name)
            out += f"; {name}: {value}" if value is not None else f"; no {name}"
        return out


class Session:
    """Thin wrapper around an httpx client that returns fully read responses."""

    def __init__(self, client: httpx.Client):
        self.client = client

    def request(self, method: str, url: str, *, accept: str = DEFAULT_ACCEPT, headers=None, content=None) -> Fetched:
        hdrs = {"Accept": accept, **(headers or {})}
        r = self.client.request(method, url, headers=hdrs, content=content)
        return Fetched(method, url, r.status_code, r.headers, r.content)

    def get(self, url: str, **kw) -> Fetched:
        return self.request("GET", url, **kw)


def with_query(url: str, query: str) -> str:
    return f"{url}{'&' if '?' in url else '?'}{query}"


def _same_origin(a: str, b: str) -> bool:
    pa, pb = urlsplit(a), urlsplit(b)
    return (pa.scheme, pa.netloc) == (pb.scheme, pb.netloc)


@dataclass
class Crawl:
    pages: dict[str, Fetched] = field(default_factory=dict)
    depth: dict[str, int] = field(default_factory=dict)

    @property
    def processes(self) -> list[Fetched]:
        """Pages that advertise an execute transition."""
        return [p for p in self.pages.values() if 200 <= p.status < 300 and p.rel("execute")]


def crawl(session: Session, entry: str, max_hops: int = MAX_HOPS) -> Crawl:
    """Breadth-first GET crawl over embedded links, staying on the entry's origin."""
    out = Crawl()
    frontier = [entry]
    for hop in range(max_hops + 1):
        next_frontier = []
        for url in frontier:
            if url in out.pages or len(out.pages) >= MAX_PAGES:
                continue
            page = session.get(url)
            out.pages[url] = page
            out.depth[url] = hop
            for link in page.links:
                target = urldefrag(link.href).url
                if _same_origin(target, entry) and target not in out.pages:
                    next_frontier.append(target)
        frontier = list(dict.fromkeys(next_frontier))
    return out


@dataclass
class Context:
    session: Session
    target: str
    style: str  # raw-wps | resource
    entry: str
    _crawl: Crawl | None = None

    def crawl(self) -> Crawl:
        if self._crawl is None:
            self._crawl = crawl(self.session, self.entry)
        return self._crawl


def _check(check_id: str, verdict: str, evidence: list[str]) -> ComplianceCheck:
    row, description = CHECKS[check_id]
    return ComplianceCheck(
        check_id=check_id, table_row=row, probe_description=description, verdict=verdict, evidence=evidence
    )


def _is_exception_report(page: Fetched) -> bool:
    try:
        parse_exception_report(page.body)
        return True
    except WPSProtocolError:
        return False


# -- probes ------------------------------------------------------------------


def probe_cache(ctx: Context) -> ComplianceCheck:
    first = ctx.session.get(ctx.entry)
    evidence = [first.line("ETag", "Last-Modified", "Cache-Control")]
    etag, modified = first.headers.get("etag"), first.headers.get("last-modified")
    if not (etag or modified or first.headers.get("cache-control")):
        evidence.append("no cache validators or freshness directives in the response")
        return _check("cache", "no", evidence)
    if not (etag or modified):
        evidence.append("freshness directive without validators; conditional requests impossible")
        return _check("cache", "partial", evidence)
    cond = {"If-None-Match": etag} if etag else {"If-Modified-Since": modified}
    again = ctx.session.get(ctx.entry, headers=cond)
    evidence.append(f"conditional {again.line()} with {next(iter(cond))}")
    return _check("cache", "yes" if again.status == 304 else "partial", evidence)


def probe_uniform_interface(ctx: Context) -> ComplianceCheck:
    s, evidence = ctx.session, []
    tunnel = s.get(with_query(ctx.target, encode_kvp(GetCapabilities())), accept="*/*")
    tunneled = 200 <= tunnel.status < 300
    evidence.append(f"operation tunneled in the query: {tunnel.line()}")
    post = s.request(
        "POST",
        ctx.target,
        accept="*/*",
        headers={"Content-Type": "text/xml; charset=utf-8"},
        content=encode_xml(GetCapabilities()),
    )
    post_read = 200 <= post.status < 300
    evidence.append(f"read carried by POST: {post.line()}")
    # an empty merge patch changes nothing even if a server accepts it
    patch = s.request(
        "PATCH", ctx.entry, accept="*/*", headers={"Content-Type": "application/merge-patch+json"}, content=b"{}"
    )
    guarded = patch.status == 405 and bool(patch.headers.get("allow"))
    evidence.append(f"disallowed verb: {patch.line('Allow')}")
    if tunneled or post_read:
        verdict = "no"
    else:
        verdict = "yes" if guarded else "partial"
    return _check("uniform_interface", verdict, evidence)


def probe_identification(ctx: Context) -> ComplianceCheck:
    if ctx.style == "raw-wps":
        page = ctx.session.get(ctx.entry, accept="*/*")
        evidence = [page.line()]
        try:
            caps = parse_capabilities(page.body)
        except WPSProtocolError:
            evidence.append("the service endpoint does not return a capabilities document")
            return _check("identification", "no", evidence)
        evidence.append(
            f"{len(caps.process_briefs)} processes are reachable only through query parameters on one endpoint"
        )
        evidence.append("the service endpoint can act as a canonical URI")
        return _check("identification", "partial", evidence)
    result = ctx.crawl()
    entry = result.pages[ctx.entry]
    evidence = [entry.line(), f"{len(entry.links)} typed links in the entry representation"]
    if not (200 <= entry.status < 300 and entry.links):
        evidence.append("no navigable canonical entry")
        return _check("identification", "no", evidence)
    uris = sorted({p.url for p in result.processes})
    for uri in uris:
        evidence.append(f"process resource {uri} -> {result.pages[uri].status}")
    if len(uris) >= 1 and ctx.entry not in uris:
        return _check("identification", "yes", evidence)
    evidence.append("processes are not exposed as resources of their own")
    return _check("identification", "partial", evidence)


def probe_negotiation(ctx: Context) -> ComplianceCheck:
    evidence, seen = [], set()
    for media in ("application/json", "application/xml", "text/html"):
        page = ctx.session.get(ctx.entry, accept=media)
        evidence.append(f"Accept {media}: {page.line('Vary')}")
        if 200 <= page.status < 300:
            seen.add(page.media_type)
    bogus = ctx.session.get(ctx.entry, accept=BOGUS_TYPE)
    evidence.append(f"Accept {BOGUS_TYPE}: {bogus.line()}")
    varied, refused = len(seen) >= 2, bogus.status == 406
    verdict = "yes" if varied and refused else "partial" if varied or refused else "no"
    if not varied:
        evidence.append(f"content type does not follow Accept ({', '.join(sorted(seen)) or 'none'})")
    return _check("negotiation", verdict, evidence)


def probe_hypermedia(ctx: Context) -> ComplianceCheck:
    result = ctx.crawl()
    entry = result.pages[ctx.entry]
    evidence = [entry.line(), f"{len(entry.links)} typed links extracted from the entry"]
    if not entry.links:
        evidence.append("no typed links; transitions must be known in advance")
        return _check("hypermedia", "no", evidence)
    evidence.append(f"crawled {len(result.pages)} resources within {MAX_HOPS} hops")
    procs = result.processes
    for p in procs[:5]:
        evidence.append(f"reached process {p.url} at hop {result.depth[p.url]}")
    if procs:
        return _check("hypermedia", "yes", evidence)
    evidence.append("no process resource reachable by following links")
    return _check("hypermedia", "partial", evidence)


def probe_status_codes(ctx: Context) -> ComplianceCheck:
    if ctx.style == "raw-wps":
        page = ctx.session.get(with_query(ctx.target, "service=WPS&version=1.0.0&request=DescribeProcess"))
        evidence = ["DescribeProcess without the required identifier", page.line()]
        if 400 <= page.status < 500:
            return _check("status_codes", "yes", evidence)
        if _is_exception_report(page):
            evidence.append(f"error carried in a {page.status} body: {page.excerpt()}")
            return _check("status_codes", "no", evidence)
        evidence.append("the missing parameter was not signalled")
        return _check("status_codes", "no", evidence)
    procs = ctx.crawl().processes
    if not procs:
        return _check("status_codes", "no", ["no job collection advertised; capability absent"])
    evidence = []
    for proc in procs:
        execute = proc.rel("execute")[0].href
        page = ctx.session.request(
            "POST", execute, headers={"Content-Type": "application/json"}, content=json.dumps({"inputs": {}}).encode()
        )
        evidence.append(f"job request with no inputs: {page.line()}")
        if 400 <= page.status < 500:
            evidence.append(f"client error signalled by status: {page.excerpt()}")
            return _check("status_codes", "yes", evidence)
        created = page.headers.get("location")
        if 200 <= page.status < 300 and created:
            cleanup = ctx.session.request("DELETE", created)
            evidence.append(f"removed the probe's job: {cleanup.line()}")
        if 200 <= page.status < 300 and (_is_exception_report(page) or b"exception" in page.body.lower()):
            evidence.append(f"error carried in a {page.status} body: {page.excerpt()}")
            return _check("status_codes", "no", evidence)
    evidence.append("no client error could be induced")
    return _check("status_codes", "partial", evidence)


def _state_view(ctx: Context) -> dict:
    """What GET must not change: collection listings (items) or the advertised process set."""
    if ctx.style == "raw-wps":
        page = ctx.session.get(ctx.entry, accept="*/*")
        try:
            return {"processes": sorted(b.identifier for b in parse_capabilities(page.body).process_briefs)}
        except WPSProtocolError:
            return {"body": page.body.decode("utf-8", errors="replace")}
    entry = ctx.session.get(ctx.entry)
    view = {}
    for link in entry.rel("collection"):
        listing = ctx.session.get(link.href)
        view[link.href] = sorted(item.href for item in listing.rel("item"))
    return view


def _synthesize_execute(ctx: Context, evidence: list[str]) -> Execute | None:
    caps_page = ctx.session.get(ctx.entry, accept="*/*")
    try:
        caps = parse_capabilities(caps_page.body)
    except WPSProtocolError:
        return None
    for brief in caps.process_briefs:
        page = ctx.session.get(with_query(ctx.target, encode_kvp(DescribeProcess((brief.identifier,)))), accept="*/*")
        try:
            desc = parse_process_description(page.body)
        except WPSProtocolError:
            continue
        inputs = []
        for d in desc.inputs:
            if d.kind == "bounding-box":
                inputs += [(d.identifier, BBoxValue(0.0, 0.0, 1.0, 1.0))] * max(d.min_occurs, 1)
            elif d.kind == "literal":
                sample = {"double": "1.0", "integer": "1"}.get(d.datatype, "probe")
                inputs += [(d.identifier, LiteralValue(sample, d.datatype))] * max(d.min_occurs, 1)
            elif d.required:
                break
        else:
            evidence.append(f"synthesized inputs for {desc.identifier}")
            return Execute(desc.identifier, tuple(inputs))
    return None


def probe_safety(ctx: Context) -> ComplianceCheck:
    evidence: list[str] = []
    before = _state_view(ctx)
    urls = [ctx.entry] if ctx.style == "raw-wps" else list(ctx.crawl().pages)[:30]
    for _ in range(3):
        for url in urls:
            ctx.session.get(url)
    after = _state_view(ctx)
    changed = before != after
    evidence.append(f"{3 * len(urls)} GETs; state view {'changed' if changed else 'unchanged'}")
    executes_on_get = False
    if ctx.style == "raw-wps":
        req = _synthesize_execute(ctx, evidence)
        if req is not None:
            page = ctx.session.get(with_query(ctx.target, encode_kvp(req)), accept="*/*")
            evidence.append(f"Execute over GET: {page.line()}")
            try:
                executes_on_get = isinstance(parse_execute_response(page.body), ExecuteResult)
            except WPSProtocolError:
                executes_on_get = False
        if not executes_on_get:
            # a complaint about missing inputs still shows GET being taken as Execute
            query = "service=WPS&version=1.0.0&request=Execute"
            page = ctx.session.get(with_query(ctx.target, query), accept="*/*")
            evidence.append(f"Execute over GET without inputs: {page.line()} {page.excerpt()}")
            executes_on_get = page.status < 300 and b"MissingParameterValue" in page.body
    else:
        before_jobs = _state_view(ctx)
        for proc in ctx.crawl().processes:
            execute = proc.rel("execute")[0].href
            page = ctx.session.get(with_query(execute, encode_kvp(GetCapabilities())))
            evidence.append(f"operation over GET on the job collection: {page.line()}")
        executes_on_get = _state_view(ctx) != before_jobs
    if executes_on_get:
        evidence.append("the endpoint accepts Execute semantics over GET")
    verdict = "no" if changed or executes_on_get else "yes"
    return _check("safety", verdict, evidence)


CHECKS: dict[str, tuple[str, str]] = {
    "cache": ("Cache", "validators on the entry and a 304 for a conditional re-GET"),
    "uniform_interface": (
        "Uniform interface",
        "no operation tunneling in the query or via POST-for-read; 405 with Allow for a disallowed verb",
    ),
    "identification": ("Identification of resources", "processes at distinct dereferenceable URIs below a canonical entry"),
    "negotiation": ("Representation: content negotiation", "Content-Type follows Accept; 406 for an unsupported type"),
    "hypermedia": ("Hypermedia: use of typed links", "a link crawl from the entry reaches a process within 3 hops"),
    "status_codes": ("Support of exception handling", "a missing required parameter yields a 4xx status"),
    "safety": ("Uniform interface: safe GET", "GETs leave the state view unchanged; no Execute over GET"),
    "layered": ("Layered approach", "no remote probe can observe intermediaries"),
    "code_on_demand": ("Code-on-demand", "no remote probe; processes always run on the server"),
}

PROBES: dict[str, Callable[[Context], ComplianceCheck]] = {
    "cache": probe_cache,
    "uniform_interface": probe_uniform_interface,
    "identification": probe_identification,
    "negotiation": probe_negotiation,
    "hypermedia": probe_hypermedia,
    "status_codes": probe_status_codes,
    "safety": probe_safety,
}
NOT_PROBED = ("layered", "code_on_demand")
