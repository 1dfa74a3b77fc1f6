"""Turn domain objects into self-describing JSON, XML or HTML representations.

JSON bodies use the envelope ``{"data": ..., "links": [...]}``. XML bodies
keep the WPS document shape where one exists and append Atom ``link``
elements to the root. HTML pages show the data and expose every link as an
anchor carrying its ``rel``.
"""

from __future__ import annotations

import html
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import datetime
from functools import singledispatch
from typing import Sequence

from wpsrest.resources.links import TypedLink
from wpsrest.resources.uris import ResourceId
from wpsrest.semantics import Problem, compute_etag
from wpsrest.wps.models import ProcessDescription, ServiceCapabilities
from wpsrest.wps.xmlcodec import (
    build_capabilities,
    build_exception_report,
    build_process_descriptions,
    to_bytes,
)

ATOM_NS = "http://www.w3.org/2005/Atom"
ET.register_namespace("atom", ATOM_NS)

_ROOT_NAMES = {
    "entry": "Entry",
    "process_collection": "Processes",
    "process": "Process",
    "job_collection": "Jobs",
    "job": "Job",
    "job_result": "Result",
}

_PAGE_TITLES = {
    "entry": "Geoprocessing services",
    "process_collection": "Processes",
    "process": "Process",
    "job_collection": "Jobs",
    "job": "Job",
    "job_result": "Result",
}


@dataclass(frozen=True)
class Representation:
    media_type: str
    body: bytes
    links: tuple[TypedLink, ...]
    etag: str
    last_modified: datetime | None = None

    @property
    def self_link(self) -> TypedLink:
        return next(link for link in self.links if link.rel == "self")


@dataclass(frozen=True)
class ProcessList:
    """The process collection: the catalog seen as a capabilities document."""

    title: str
    provider: str
    endpoint: str
    processes: tuple[ProcessDescription, ...]


# -- data views --------------------------------------------------------------


@singledispatch
def to_data(obj) -> object:
    """JSON-ready view of a domain object."""
    raise TypeError(f"no JSON view for {type(obj).__name__}")


@to_data.register(dict)
@to_data.register(list)
def _(obj):
    return obj


def _descriptor_data(desc) -> dict:
    out = {"id": desc.identifier, "kind": desc.kind}
    if desc.datatype is not None:
        out["dataType"] = desc.datatype
    out["formats"] = list(desc.supported_formats)
    if hasattr(desc, "min_occurs"):
        out["minOccurs"] = desc.min_occurs
        out["maxOccurs"] = desc.max_occurs
    return out


@to_data.register
def _(obj: ProcessDescription):
    return {
        "id": obj.identifier,
        "title": obj.title,
        "abstract": obj.abstract,
        "keywords": list(obj.taxonomy_tags),
        "inputs": [_descriptor_data(d) for d in obj.inputs],
        "outputs": [_descriptor_data(d) for d in obj.outputs],
    }


@to_data.register
def _(obj: ProcessList):
    return {
        "title": obj.title,
        "provider": obj.provider,
        "processes": [
            {"id": p.identifier, "title": p.title, "keywords": list(p.taxonomy_tags)} for p in obj.processes
        ],
    }


@to_data.register
def _(obj: Problem):
    return obj.to_data()


# -- XML views ---------------------------------------------------------------


def _generic_element(name: str, value) -> ET.Element:
    el = ET.Element(name)
    if isinstance(value, dict):
        for key, item in value.items():
            if item is not None:
                el.append(_generic_element(key, item))
    elif isinstance(value, list):
        for item in value:
            el.append(_generic_element("item", item))
    elif isinstance(value, bool):
        el.text = "true" if value else "false"
    else:
        el.text = str(value)
    return el


@singledispatch
def to_element(obj, root_name: str) -> ET.Element:
    """XML view of a domain object; plain data maps onto a generic element tree."""
    return _generic_element(root_name, to_data(obj))


@to_element.register
def _(obj: ProcessDescription, root_name: str):
    return build_process_descriptions([obj])


@to_element.register
def _(obj: ProcessList, root_name: str):
    return build_capabilities(
        ServiceCapabilities(obj.title, obj.provider, tuple(p.brief() for p in obj.processes), obj.endpoint)
    )


@to_element.register
def _(obj: Problem, root_name: str):
    return build_exception_report(obj.report)


# -- rendering ---------------------------------------------------------------


def _json_body(data, links: Sequence[TypedLink]) -> bytes:
    envelope = {"data": data, "links": [link.to_json() for link in links]}
    return json.dumps(envelope, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def _xml_body(root: ET.Element, links: Sequence[TypedLink]) -> bytes:
    for link in links:
        el = ET.SubElement(root, f"{{{ATOM_NS}}}link")
        el.set("rel", link.rel)
        el.set("href", link.href)
        if link.media_type:
            el.set("type", link.media_type)
        if link.title:
            el.set("title", link.title)
    return to_bytes(root)


def _html_body(title: str, data, links: Sequence[TypedLink]) -> bytes:
    esc = html.escape
    items = []
    for link in links:
        attrs = f'rel="{esc(link.rel)}" href="{esc(link.href)}"'
        if link.media_type:
            attrs += f' type="{esc(link.media_type)}"'
        if link.title:
            attrs += f' title="{esc(link.title)}"'
        items.append(f"<li><a {attrs}>{esc(link.title or link.rel)}</a> ({esc(link.rel)})</li>")
    page = (
        "<!DOCTYPE html>\n"
        '<html><head><meta charset="utf-8"><title>' + esc(title) + "</title></head>\n"
        "<body><h1>" + esc(title) + "</h1>\n"
        "<pre>" + esc(json.dumps(data, indent=2, ensure_ascii=False)) + "</pre>\n"
        "<h2>Links</h2>\n<ul>\n" + "\n".join(items) + "\n</ul>\n</body></html>\n"
    )
    return page.encode("utf-8")


def render(
    rid: ResourceId,
    obj,
    media_type: str,
    links: Sequence[TypedLink],
    last_modified: datetime | None = None,
) -> Representation:
    links = tuple(links)
    if sum(1 for link in links if link.rel == "self") != 1:
        raise ValueError("a representation carries exactly one self link")
    if media_type == "application/json":
        body = _json_body(to_data(obj), links)
    elif media_type == "application/xml":
        body = _xml_body(to_element(obj, _ROOT_NAMES[rid.kind]), links)
    elif media_type == "text/html":
        title = _PAGE_TITLES[rid.kind]
        if isinstance(obj, Problem):
            title = f"{obj.status} {obj.first.code}"
        body = _html_body(title, to_data(obj), links)
    else:
        raise ValueError(f"unsupported representation type {media_type!r}")
    return Representation(media_type, body, links, compute_etag(body), last_modified)
