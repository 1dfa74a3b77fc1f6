"""Typed links: the transition table per resource and link extraction from bodies."""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from html.parser import HTMLParser
from typing import Sequence
from urllib.parse import urljoin, urlsplit

from wpsrest.resources.uris import ENTRY, JOBS, PROCESSES, ResourceId, uri_for

RELATIONS = (
    "self",
    "up",
    "collection",
    "item",
    "describedby",
    "execute",
    "monitor",
    "results",
    "similar",
    "alternate",
)


@dataclass(frozen=True)
class TypedLink:
    rel: str
    href: str
    media_type: str | None = None
    title: str | None = None

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unregistered link relation {self.rel!r}")
        parts = urlsplit(self.href)
        if not (parts.scheme and parts.netloc):
            raise ValueError(f"link target must be absolute: {self.href!r}")

    def to_json(self) -> dict:
        out = {"rel": self.rel, "href": self.href, "type": self.media_type}
        if self.title is not None:
            out["title"] = self.title
        return out


@dataclass(frozen=True)
class ProcessSummary:
    identifier: str
    title: str = ""
    tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class ResourceState:
    """What the link table needs to know about the resource being rendered."""

    processes: tuple[ProcessSummary, ...] = ()
    job_ids: tuple[str, ...] = ()
    job_status: str | None = None
    job_process: str | None = None


def similar_processes(pid: str, processes: Sequence[ProcessSummary]) -> list[ProcessSummary]:
    """Other processes sharing at least one taxonomy tag with ``pid``."""
    me = next((p for p in processes if p.identifier == pid), None)
    if me is None or not me.tags:
        return []
    tags = set(me.tags)
    return [p for p in processes if p.identifier != pid and tags.intersection(p.tags)]


def links_for(rid: ResourceId, base: str, state: ResourceState = ResourceState()) -> list[TypedLink]:
    def link(rel, target, media_type=None, title=None):
        return TypedLink(rel, uri_for(target, base), media_type, title)

    out = [link("self", rid)]
    kind = rid.kind
    if kind == "entry":
        out.append(link("collection", PROCESSES, title="Processes"))
        out.append(link("collection", JOBS, title="Jobs"))
    elif kind == "process_collection":
        out.append(link("up", ENTRY))
        for p in state.processes:
            target = ResourceId("process", p.identifier)
            out.append(link("item", target, title=p.title or p.identifier))
            out.append(link("describedby", target, "application/xml", title=p.title or p.identifier))
    elif kind == "process":
        out.append(link("up", PROCESSES))
        out.append(link("execute", ResourceId("job_collection", rid.key), "application/json"))
        for p in similar_processes(rid.key, state.processes):
            out.append(link("similar", ResourceId("process", p.identifier), title=p.title or p.identifier))
    elif kind == "job_collection":
        out.append(link("up", ENTRY if rid.key is None else ResourceId("process", rid.key)))
        for jid in state.job_ids:
            out.append(link("item", ResourceId("job", jid)))
    elif kind == "job":
        out.append(link("up", JOBS))
        if state.job_status in ("accepted", "running"):
            out.append(link("monitor", rid))
        elif state.job_status == "succeeded":
            out.append(link("results", ResourceId("job_result", rid.key)))
        elif state.job_status == "failed" and state.job_process is not None:
            for p in similar_processes(state.job_process, state.processes):
                out.append(link("similar", ResourceId("process", p.identifier), title=p.title or p.identifier))
    elif kind == "job_result":
        out.append(link("up", ResourceId("job", rid.key)))
    return out


# -- extraction --------------------------------------------------------------


def _make(rel_tokens: str | None, href: str | None, base: str | None, media_type=None, title=None) -> list[TypedLink]:
    if not rel_tokens or not href:
        return []
    href = urljoin(base, href) if base else href
    out = []
    for rel in rel_tokens.split():
        try:
            out.append(TypedLink(rel.lower(), href, media_type or None, title or None))
        except ValueError:
            continue
    return out


class _AnchorParser(HTMLParser):
    def __init__(self, base):
        super().__init__(convert_charrefs=True)
        self.base = base
        self.links: list[TypedLink] = []

    def handle_starttag(self, tag, attrs):
        if tag in ("a", "link"):
            a = dict(attrs)
            self.links.extend(_make(a.get("rel"), a.get("href"), self.base, a.get("type"), a.get("title")))


def parse_links(body: bytes, content_type: str | None, base: str | None = None) -> list[TypedLink]:
    """Recover the typed links embedded in a JSON envelope, XML document or HTML page.

    Links with unregistered relations or targets that cannot be made
    absolute are skipped; unreadable bodies yield an empty list.
    """
    media = (content_type or "").split(";")[0].strip().lower()
    try:
        if media.endswith("json"):
            doc = json.loads(body)
            raw = doc.get("links", []) if isinstance(doc, dict) else []
            out = []
            for item in raw if isinstance(raw, list) else []:
                if isinstance(item, dict) and isinstance(item.get("href"), str) and isinstance(item.get("rel"), str):
                    out.extend(_make(item["rel"], item["href"], base, item.get("type"), item.get("title")))
            return out
        if media.endswith("xml"):
            root = ET.fromstring(body)
            out = []
            for el in root.iter():
                if isinstance(el.tag, str) and el.tag.rsplit("}", 1)[-1] == "link":
                    out.extend(_make(el.get("rel"), el.get("href"), base, el.get("type"), el.get("title")))
            return out
        if media == "text/html":
            parser = _AnchorParser(base)
            parser.feed(body.decode("utf-8", errors="replace"))
            parser.close()
            return parser.links
    except (ValueError, ET.ParseError, UnicodeError, LookupError):
        return []
    return []
