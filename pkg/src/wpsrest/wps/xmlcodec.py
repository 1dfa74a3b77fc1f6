"""XML/POST binding: request and response documents for WPS 1.0.0.

Emitted documents use one fixed namespace (:data:`WPS_NS`). Parsers match
elements on local names only, so documents from servers that mix the
``wps``/``ows`` prefixes are read just as well.

Text that XML would not round-trip verbatim (carriage returns, arbitrary
binary payloads) is written base64-encoded with ``encoding="base64"`` on the
carrying element.
"""

from __future__ import annotations

import base64
import binascii
import functools
import xml.etree.ElementTree as ET
from typing import Callable, Iterable, Iterator, Sequence, TypeVar

from wpsrest.wps.errors import (
    InvariantViolation,
    MalformedDocument,
    SchemaViolation,
    UnknownOperation,
)
from wpsrest.wps.models import (
    _NON_XML_CHARS,
    BBoxValue,
    ComplexValue,
    DataValue,
    DescribeProcess,
    ExceptionEntry,
    ExceptionReport,
    Execute,
    ExecuteResult,
    GetCapabilities,
    InputDescriptor,
    LiteralValue,
    OperationRequest,
    OutputDescriptor,
    ProcessBrief,
    ProcessDescription,
    ServiceCapabilities,
)

WPS_NS = "http://www.opengis.net/wps/1.0.0"
WPS_VERSION = "1.0.0"

ET.register_namespace("wps", WPS_NS)

T = TypeVar("T")


# -- element helpers ---------------------------------------------------------


def _tag(name: str) -> str:
    return f"{{{WPS_NS}}}{name}"


def local_name(el: ET.Element) -> str:
    tag = el.tag if isinstance(el.tag, str) else ""
    return tag.rsplit("}", 1)[-1]


def _children(parent: ET.Element, name: str) -> Iterator[ET.Element]:
    return (c for c in parent if local_name(c) == name)


def _child(parent: ET.Element, name: str) -> ET.Element | None:
    return next(_children(parent, name), None)


def _required_child(parent: ET.Element, name: str) -> ET.Element:
    el = _child(parent, name)
    if el is None:
        raise SchemaViolation(f"<{local_name(parent)}> is missing <{name}>")
    return el


def _required_attr(el: ET.Element, name: str) -> str:
    value = el.get(name)
    if value is None:
        raise SchemaViolation(f"<{local_name(el)}> is missing attribute {name!r}")
    return value


def _set_text(el: ET.Element, text: str) -> None:
    if "\r" in text:
        el.set("encoding", "base64")
        el.text = base64.b64encode(text.encode("utf-8")).decode("ascii")
    else:
        el.text = text


def _get_text(el: ET.Element) -> str:
    text = el.text or ""
    if el.get("encoding") == "base64":
        return base64.b64decode(text, validate=True).decode("utf-8")
    return text


def _text_child(parent: ET.Element, name: str, text: str) -> ET.Element:
    el = ET.SubElement(parent, _tag(name))
    _set_text(el, text)
    return el


def _required_text(parent: ET.Element, name: str) -> str:
    return _get_text(_required_child(parent, name))


def _optional_text(parent: ET.Element, name: str) -> str | None:
    el = _child(parent, name)
    return None if el is None else _get_text(el)


def _root(name: str, **attrs: str) -> ET.Element:
    root = ET.Element(_tag(name))
    for key, value in attrs.items():
        root.set(key, value)
    return root


def to_bytes(root: ET.Element) -> bytes:
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)


def parse_document(data: bytes | str) -> ET.Element:
    """Parse bytes into an element tree, mapping every parser failure to MalformedDocument."""
    if not isinstance(data, (bytes, bytearray, str)):
        raise MalformedDocument(f"expected bytes, got {type(data).__name__}")
    try:
        return ET.fromstring(data)
    except (ET.ParseError, ValueError, UnicodeError, LookupError) as exc:  # LookupError: unknown declared encoding
        raise MalformedDocument(str(exc)) from exc


def _schema_guard(fn: Callable[..., T]) -> Callable[..., T]:
    """Turn model invariant failures and bad scalar values into SchemaViolation."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (InvariantViolation, ValueError, TypeError, binascii.Error) as exc:
            raise SchemaViolation(str(exc)) from exc

    return wrapper


def _expect_root(data: bytes | str, name: str) -> ET.Element:
    root = parse_document(data)
    if local_name(root) != name:
        raise SchemaViolation(f"expected <{name}> root, found <{local_name(root)}>")
    return root


# -- data values -------------------------------------------------------------


def _xml_safe_text(body: bytes) -> str | None:
    try:
        text = body.decode("utf-8")
    except UnicodeDecodeError:
        return None
    if "\r" in text or _NON_XML_CHARS.search(text):
        return None
    return text


def _put_value(parent: ET.Element, value: DataValue) -> None:
    if isinstance(value, ComplexValue) and value.href is not None:
        ref = ET.SubElement(parent, _tag("Reference"))
        ref.set("href", value.href)
        ref.set("mimeType", value.media_type)
        return
    data = ET.SubElement(parent, _tag("Data"))
    if isinstance(value, LiteralValue):
        el = ET.SubElement(data, _tag("LiteralData"))
        el.set("dataType", value.datatype)
        _set_text(el, value.text)
    elif isinstance(value, BBoxValue):
        el = ET.SubElement(data, _tag("BoundingBoxData"))
        el.set("crs", value.crs)
        _text_child(el, "LowerCorner", f"{value.minx!r} {value.miny!r}")
        _text_child(el, "UpperCorner", f"{value.maxx!r} {value.maxy!r}")
    else:
        el = ET.SubElement(data, _tag("ComplexData"))
        el.set("mimeType", value.media_type)
        text = _xml_safe_text(value.body)
        if text is None:
            el.set("encoding", "base64")
            el.text = base64.b64encode(value.body).decode("ascii")
        else:
            el.text = text


def _corner(el: ET.Element, name: str) -> tuple[float, float]:
    parts = _required_text(el, name).split()
    if len(parts) != 2:
        raise SchemaViolation(f"<{name}> needs two coordinates")
    return float(parts[0]), float(parts[1])


def _take_value(parent: ET.Element) -> DataValue:
    ref = _child(parent, "Reference")
    if ref is not None:
        return ComplexValue(
            media_type=ref.get("mimeType", "application/octet-stream"),
            href=_required_attr(ref, "href"),
        )
    data = _required_child(parent, "Data")
    el = _child(data, "LiteralData")
    if el is not None:
        return LiteralValue(_get_text(el), el.get("dataType", "string"))
    el = _child(data, "BoundingBoxData")
    if el is not None:
        minx, miny = _corner(el, "LowerCorner")
        maxx, maxy = _corner(el, "UpperCorner")
        return BBoxValue(minx, miny, maxx, maxy, crs=el.get("crs", ""))
    el = _child(data, "ComplexData")
    if el is not None:
        if el.get("encoding") == "base64":
            body = base64.b64decode(el.text or "", validate=True)
        else:
            body = (el.text or "").encode("utf-8")
        return ComplexValue(media_type=_required_attr(el, "mimeType"), body=body)
    raise SchemaViolation("<Data> carries no LiteralData, BoundingBoxData or ComplexData")


def _put_pairs(parent: ET.Element, item: str, pairs: Iterable[tuple[str, DataValue]]) -> None:
    for ident, value in pairs:
        el = ET.SubElement(parent, _tag(item))
        _text_child(el, "Identifier", ident)
        _put_value(el, value)


def _take_pairs(parent: ET.Element | None, item: str) -> tuple[tuple[str, DataValue], ...]:
    if parent is None:
        return ()
    return tuple((_required_text(el, "Identifier"), _take_value(el)) for el in _children(parent, item))


# -- operation requests ------------------------------------------------------


def encode_xml(req: OperationRequest) -> bytes:
    """Encode a request as an XML/POST document whose root names the operation."""
    if isinstance(req, GetCapabilities):
        return to_bytes(_root("GetCapabilities", service=req.service))
    if isinstance(req, DescribeProcess):
        root = _root("DescribeProcess", service="WPS", version=WPS_VERSION)
        for ident in req.identifiers:
            _text_child(root, "Identifier", ident)
        return to_bytes(root)
    if isinstance(req, Execute):
        root = _root("Execute", service="WPS", version=WPS_VERSION)
        _text_child(root, "Identifier", req.process_id)
        _put_pairs(ET.SubElement(root, _tag("DataInputs")), "Input", req.inputs)
        _text_child(root, "ResponseForm", req.response_form)
        return to_bytes(root)
    raise TypeError(f"not an operation request: {req!r}")


@_schema_guard
def parse_xml(data: bytes | str) -> OperationRequest:
    root = parse_document(data)
    name = local_name(root)
    if name == "GetCapabilities":
        return GetCapabilities(root.get("service", "WPS"))
    if name == "DescribeProcess":
        return DescribeProcess(tuple(_get_text(el) for el in _children(root, "Identifier")))
    if name == "Execute":
        form = (_optional_text(root, "ResponseForm") or "by-value").strip().lower()
        return Execute(
            _required_text(root, "Identifier"),
            _take_pairs(_child(root, "DataInputs"), "Input"),
            form,
        )
    raise UnknownOperation(name)


# -- capabilities ------------------------------------------------------------

_OPERATION_NAMES = ("GetCapabilities", "DescribeProcess", "Execute")


def build_capabilities(caps: ServiceCapabilities) -> ET.Element:
    root = _root("Capabilities", service="WPS", version=WPS_VERSION)
    _text_child(ET.SubElement(root, _tag("ServiceIdentification")), "Title", caps.title)
    _text_child(ET.SubElement(root, _tag("ServiceProvider")), "ProviderName", caps.provider)
    ops = ET.SubElement(root, _tag("OperationsMetadata"))
    for op in _OPERATION_NAMES:
        el = ET.SubElement(ops, _tag("Operation"))
        el.set("name", op)
        el.set("href", caps.endpoint)
    offerings = ET.SubElement(root, _tag("ProcessOfferings"))
    for brief in caps.process_briefs:
        proc = ET.SubElement(offerings, _tag("Process"))
        _text_child(proc, "Identifier", brief.identifier)
        _text_child(proc, "Title", brief.title)
    return root


def encode_capabilities(caps: ServiceCapabilities) -> bytes:
    return to_bytes(build_capabilities(caps))


@_schema_guard
def parse_capabilities(data: bytes | str) -> ServiceCapabilities:
    root = _expect_root(data, "Capabilities")
    ident = _required_child(root, "ServiceIdentification")
    provider = _required_child(root, "ServiceProvider")
    op = _required_child(_required_child(root, "OperationsMetadata"), "Operation")
    briefs = tuple(
        ProcessBrief(_required_text(p, "Identifier"), _optional_text(p, "Title") or "")
        for p in _children(_required_child(root, "ProcessOfferings"), "Process")
    )
    return ServiceCapabilities(
        title=_required_text(ident, "Title"),
        provider=_required_text(provider, "ProviderName"),
        process_briefs=briefs,
        endpoint=_required_attr(op, "href"),
    )


# -- process descriptions ----------------------------------------------------


def _put_descriptor(parent: ET.Element, item: str, desc: InputDescriptor | OutputDescriptor) -> None:
    el = ET.SubElement(parent, _tag(item))
    el.set("kind", desc.kind)
    if desc.datatype is not None:
        el.set("dataType", desc.datatype)
    if isinstance(desc, InputDescriptor):
        el.set("minOccurs", str(desc.min_occurs))
        el.set("maxOccurs", str(desc.max_occurs))
    _text_child(el, "Identifier", desc.identifier)
    for fmt in desc.supported_formats:
        ET.SubElement(el, _tag("Format")).set("mimeType", fmt)


def _take_descriptor(el: ET.Element, cls):
    kwargs = dict(
        identifier=_required_text(el, "Identifier"),
        kind=_required_attr(el, "kind"),
        datatype=el.get("dataType"),
        supported_formats=tuple(_required_attr(f, "mimeType") for f in _children(el, "Format")),
    )
    if cls is InputDescriptor:
        kwargs["min_occurs"] = int(el.get("minOccurs", "1"))
        kwargs["max_occurs"] = int(el.get("maxOccurs", "1"))
    return cls(**kwargs)


def build_process_description(desc: ProcessDescription) -> ET.Element:
    el = ET.Element(_tag("ProcessDescription"))
    _text_child(el, "Identifier", desc.identifier)
    _text_child(el, "Title", desc.title)
    if desc.abstract is not None:
        _text_child(el, "Abstract", desc.abstract)
    keywords = ET.SubElement(el, _tag("Keywords"))
    for tag in desc.taxonomy_tags:
        _text_child(keywords, "Keyword", tag)
    inputs = ET.SubElement(el, _tag("DataInputs"))
    for desc_in in desc.inputs:
        _put_descriptor(inputs, "Input", desc_in)
    outputs = ET.SubElement(el, _tag("ProcessOutputs"))
    for desc_out in desc.outputs:
        _put_descriptor(outputs, "Output", desc_out)
    return el


def build_process_descriptions(descs: Sequence[ProcessDescription]) -> ET.Element:
    root = _root("ProcessDescriptions", service="WPS", version=WPS_VERSION)
    root.extend(build_process_description(d) for d in descs)
    return root


def encode_process_descriptions(descs: Sequence[ProcessDescription]) -> bytes:
    return to_bytes(build_process_descriptions(descs))


def encode_process_description(desc: ProcessDescription) -> bytes:
    return encode_process_descriptions([desc])


def _take_process_description(el: ET.Element) -> ProcessDescription:
    keywords = _child(el, "Keywords")
    inputs = _child(el, "DataInputs")
    outputs = _required_child(el, "ProcessOutputs")
    return ProcessDescription(
        identifier=_required_text(el, "Identifier"),
        title=_optional_text(el, "Title") or "",
        abstract=_optional_text(el, "Abstract"),
        taxonomy_tags=tuple(_get_text(k) for k in _children(keywords, "Keyword")) if keywords is not None else (),
        inputs=tuple(_take_descriptor(i, InputDescriptor) for i in _children(inputs, "Input"))
        if inputs is not None
        else (),
        outputs=tuple(_take_descriptor(o, OutputDescriptor) for o in _children(outputs, "Output")),
    )


@_schema_guard
def parse_process_descriptions(data: bytes | str) -> tuple[ProcessDescription, ...]:
    root = _expect_root(data, "ProcessDescriptions")
    return tuple(_take_process_description(el) for el in _children(root, "ProcessDescription"))


def parse_process_description(data: bytes | str) -> ProcessDescription:
    """Parse a document holding exactly one process description."""
    descs = parse_process_descriptions(data)
    if len(descs) != 1:
        raise SchemaViolation(f"expected one process description, found {len(descs)}")
    return descs[0]


# -- execute responses and exceptions ----------------------------------------


def build_exception_report(report: ExceptionReport) -> ET.Element:
    root = _root("ExceptionReport", version=WPS_VERSION)
    for entry in report.entries:
        el = ET.SubElement(root, _tag("Exception"))
        el.set("exceptionCode", entry.code)
        if entry.locator is not None:
            el.set("locator", entry.locator)
        if entry.text is not None:
            _text_child(el, "ExceptionText", entry.text)
    return root


def encode_exception_report(report: ExceptionReport) -> bytes:
    if not isinstance(report, ExceptionReport) or not report.entries:
        raise InvariantViolation("refusing to encode an empty exception report")
    return to_bytes(build_exception_report(report))


def _take_exception_report(root: ET.Element) -> ExceptionReport:
    entries = tuple(
        ExceptionEntry(
            code=_required_attr(el, "exceptionCode"),
            locator=el.get("locator"),
            text=_optional_text(el, "ExceptionText"),
        )
        for el in _children(root, "Exception")
    )
    return ExceptionReport(entries)


@_schema_guard
def parse_exception_report(data: bytes | str) -> ExceptionReport:
    return _take_exception_report(_expect_root(data, "ExceptionReport"))


def build_execute_response(result: ExecuteResult) -> ET.Element:
    root = _root("ExecuteResponse", service="WPS", version=WPS_VERSION)
    _text_child(ET.SubElement(root, _tag("Process")), "Identifier", result.process_id)
    ET.SubElement(ET.SubElement(root, _tag("Status")), _tag("ProcessSucceeded"))
    _put_pairs(ET.SubElement(root, _tag("ProcessOutputs")), "Output", result.outputs)
    return root


def encode_execute_response(result: ExecuteResult) -> bytes:
    return to_bytes(build_execute_response(result))


@_schema_guard
def parse_execute_response(data: bytes | str) -> ExecuteResult | ExceptionReport:
    """Read an Execute reply, which is either a result or an exception report.

    A bare ``ExceptionReport`` root and an ``ExecuteResponse`` that embeds a
    report (a failed status) both yield :class:`ExceptionReport`.
    """
    root = parse_document(data)
    name = local_name(root)
    if name == "ExceptionReport":
        return _take_exception_report(root)
    if name != "ExecuteResponse":
        raise SchemaViolation(f"unexpected <{name}> root in execute response")
    for el in root.iter():
        if el is not root and local_name(el) == "ExceptionReport":
            return _take_exception_report(el)
    return ExecuteResult(
        _required_text(_required_child(root, "Process"), "Identifier"),
        _take_pairs(_required_child(root, "ProcessOutputs"), "Output"),
    )
