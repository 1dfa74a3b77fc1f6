"""Immutable document model for WPS 1.0.0 requests and responses.

Every model validates its invariants on construction and raises
:class:`InvariantViolation` otherwise. Sequence fields are normalised to
tuples so instances are hashable and compare structurally.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Literal, Union

from wpsrest.wps.errors import InvariantViolation

LITERAL_DATATYPES = ("double", "integer", "string")
DESCRIPTOR_KINDS = ("literal", "complex", "bounding-box")
RESPONSE_FORMS = ("by-value", "by-reference")

# Codes with a fixed meaning; anything else is carried through verbatim.
KNOWN_EXCEPTION_CODES = (
    "MissingParameterValue",
    "InvalidParameterValue",
    "ServerBusy",
    "NoApplicableCode",
)

# Characters outside the XML 1.0 Char production cannot be carried by any
# XML document, so models refuse them up front.
_NON_XML_CHARS = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f\ud800-\udfff\ufffe\uffff]")


def _fail(message: str) -> None:
    raise InvariantViolation(message)


def _check_text(name: str, value: object, *, blank_ok: bool = True) -> None:
    if not isinstance(value, str):
        _fail(f"{name} must be a string, got {type(value).__name__}")
    if _NON_XML_CHARS.search(value):
        _fail(f"{name} contains characters that XML cannot carry")
    if not blank_ok and not value.strip():
        _fail(f"{name} must not be blank")


def _check_optional_text(name: str, value: object) -> None:
    if value is not None:
        _check_text(name, value)


def _freeze(obj: object, name: str) -> None:
    object.__setattr__(obj, name, tuple(getattr(obj, name)))


# -- data values -------------------------------------------------------------


@dataclass(frozen=True)
class LiteralValue:
    text: str
    datatype: str = "string"

    def __post_init__(self):
        _check_text("literal text", self.text)
        if self.datatype not in LITERAL_DATATYPES:
            _fail(f"unsupported literal datatype {self.datatype!r}")


@dataclass(frozen=True)
class ComplexValue:
    """A complex input or output, either embedded (``body``) or referenced (``href``)."""

    media_type: str
    body: bytes | None = None
    href: str | None = None

    def __post_init__(self):
        _check_text("media type", self.media_type, blank_ok=False)
        if (self.body is None) == (self.href is None):
            _fail("complex value needs exactly one of body or href")
        if self.body is not None and not isinstance(self.body, (bytes, bytearray)):
            _fail("complex body must be bytes")
        if isinstance(self.body, bytearray):
            object.__setattr__(self, "body", bytes(self.body))
        if self.href is not None:
            _check_text("href", self.href, blank_ok=False)

    @property
    def by_reference(self) -> bool:
        return self.href is not None


@dataclass(frozen=True)
class BBoxValue:
    minx: float
    miny: float
    maxx: float
    maxy: float
    crs: str = "EPSG:4326"

    def __post_init__(self):
        for name in ("minx", "miny", "maxx", "maxy"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                _fail(f"bbox {name} must be a number")
            object.__setattr__(self, name, float(value))
        # NaN fails both comparisons, which is what we want
        if not (self.minx <= self.maxx and self.miny <= self.maxy):
            _fail("bbox requires minx <= maxx and miny <= maxy")
        _check_text("crs", self.crs)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (self.minx, self.miny, self.maxx, self.maxy)


DataValue = Union[LiteralValue, ComplexValue, BBoxValue]


def _check_data_value(name: str, value: object) -> None:
    if not isinstance(value, (LiteralValue, ComplexValue, BBoxValue)):
        _fail(f"{name} must be a data value, got {type(value).__name__}")


def _check_pairs(name: str, pairs: tuple) -> None:
    for pair in pairs:
        if not isinstance(pair, tuple) or len(pair) != 2:
            _fail(f"{name} entries must be (identifier, value) pairs")
        _check_text(f"{name} identifier", pair[0], blank_ok=False)
        _check_data_value(f"{name} value", pair[1])


# -- requests ----------------------------------------------------------------


@dataclass(frozen=True)
class GetCapabilities:
    service: str = "WPS"

    def __post_init__(self):
        _check_text("service", self.service, blank_ok=False)


@dataclass(frozen=True)
class DescribeProcess:
    identifiers: tuple[str, ...]

    def __post_init__(self):
        if isinstance(self.identifiers, str):
            _fail("identifiers must be a sequence of strings")
        _freeze(self, "identifiers")
        if not self.identifiers:
            _fail("DescribeProcess needs at least one identifier")
        for ident in self.identifiers:
            _check_text("process identifier", ident, blank_ok=False)


@dataclass(frozen=True)
class Execute:
    process_id: str
    inputs: tuple[tuple[str, DataValue], ...] = ()
    response_form: Literal["by-value", "by-reference"] = "by-value"

    def __post_init__(self):
        _check_text("process identifier", self.process_id, blank_ok=False)
        object.__setattr__(self, "inputs", tuple(tuple(p) for p in self.inputs))
        _check_pairs("input", self.inputs)
        if self.response_form not in RESPONSE_FORMS:
            _fail(f"unknown response form {self.response_form!r}")


OperationRequest = Union[GetCapabilities, DescribeProcess, Execute]


# -- responses ---------------------------------------------------------------


@dataclass(frozen=True)
class ProcessBrief:
    identifier: str
    title: str = ""

    def __post_init__(self):
        _check_text("process identifier", self.identifier, blank_ok=False)
        _check_text("process title", self.title)


@dataclass(frozen=True)
class ServiceCapabilities:
    title: str
    provider: str
    process_briefs: tuple[ProcessBrief, ...]
    endpoint: str

    def __post_init__(self):
        _check_text("title", self.title)
        _check_text("provider", self.provider)
        _check_text("endpoint", self.endpoint, blank_ok=False)
        _freeze(self, "process_briefs")
        if not self.process_briefs:
            _fail("capabilities must offer at least one process")
        idents = [b.identifier for b in self.process_briefs]
        if len(set(idents)) != len(idents):
            _fail("process identifiers must be pairwise distinct")


@dataclass(frozen=True)
class InputDescriptor:
    identifier: str
    kind: str
    datatype: str | None = None
    supported_formats: tuple[str, ...] = ()
    min_occurs: int = 1
    max_occurs: int = 1

    def __post_init__(self):
        _check_descriptor(self)
        for name in ("min_occurs", "max_occurs"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                _fail(f"{name} must be a non-negative integer")
        if self.min_occurs > self.max_occurs:
            _fail("min_occurs must not exceed max_occurs")

    @property
    def required(self) -> bool:
        return self.min_occurs > 0


@dataclass(frozen=True)
class OutputDescriptor:
    identifier: str
    kind: str
    datatype: str | None = None
    supported_formats: tuple[str, ...] = ()

    def __post_init__(self):
        _check_descriptor(self)


def _check_descriptor(desc) -> None:
    _check_text("descriptor identifier", desc.identifier, blank_ok=False)
    if desc.kind not in DESCRIPTOR_KINDS:
        _fail(f"unknown descriptor kind {desc.kind!r}")
    if isinstance(desc.supported_formats, str):
        _fail("supported_formats must be a sequence")
    _freeze(desc, "supported_formats")
    for fmt in desc.supported_formats:
        _check_text("format", fmt, blank_ok=False)
    if desc.kind == "literal":
        if desc.datatype not in LITERAL_DATATYPES:
            _fail("literal descriptors need a datatype among " + ", ".join(LITERAL_DATATYPES))
    elif desc.datatype is not None:
        _fail("only literal descriptors carry a datatype")
    if desc.kind == "complex" and not desc.supported_formats:
        _fail("complex descriptors need at least one supported format")


@dataclass(frozen=True)
class ProcessDescription:
    identifier: str
    title: str = ""
    abstract: str | None = None
    taxonomy_tags: tuple[str, ...] = ()
    inputs: tuple[InputDescriptor, ...] = ()
    outputs: tuple[OutputDescriptor, ...] = ()

    def __post_init__(self):
        _check_text("process identifier", self.identifier, blank_ok=False)
        _check_text("process title", self.title)
        _check_optional_text("abstract", self.abstract)
        for name in ("taxonomy_tags", "inputs", "outputs"):
            if isinstance(getattr(self, name), str):
                _fail(f"{name} must be a sequence")
            _freeze(self, name)
        for tag in self.taxonomy_tags:
            _check_text("taxonomy tag", tag, blank_ok=False)
        if not self.outputs:
            _fail("a process must declare at least one output")
        idents = [i.identifier for i in self.inputs]
        if len(set(idents)) != len(idents):
            _fail("input identifiers must be distinct")
        for desc in (*self.inputs, *self.outputs):
            if not desc.supported_formats:
                _fail(f"descriptor {desc.identifier!r} has no supported format")

    def input(self, identifier: str) -> InputDescriptor | None:
        return next((i for i in self.inputs if i.identifier == identifier), None)

    def output(self, identifier: str) -> OutputDescriptor | None:
        return next((o for o in self.outputs if o.identifier == identifier), None)

    def brief(self) -> ProcessBrief:
        return ProcessBrief(self.identifier, self.title)


@dataclass(frozen=True)
class ExecuteResult:
    process_id: str
    outputs: tuple[tuple[str, DataValue], ...]

    def __post_init__(self):
        _check_text("process identifier", self.process_id, blank_ok=False)
        object.__setattr__(self, "outputs", tuple(tuple(p) for p in self.outputs))
        if not self.outputs:
            _fail("an execute result carries at least one output")
        _check_pairs("output", self.outputs)

    def output(self, identifier: str) -> DataValue | None:
        return next((v for i, v in self.outputs if i == identifier), None)


@dataclass(frozen=True)
class ExceptionEntry:
    code: str
    locator: str | None = None
    text: str | None = None

    def __post_init__(self):
        _check_text("exception code", self.code, blank_ok=False)
        _check_optional_text("exception locator", self.locator)
        _check_optional_text("exception text", self.text)


@dataclass(frozen=True)
class ExceptionReport:
    entries: tuple[ExceptionEntry, ...] = field(default=())

    def __post_init__(self):
        _freeze(self, "entries")
        if not self.entries:
            _fail("an exception report carries at least one exception")

    @classmethod
    def single(cls, code: str, locator: str | None = None, text: str | None = None) -> "ExceptionReport":
        return cls((ExceptionEntry(code, locator, text),))

    @property
    def code(self) -> str:
        """Code of the governing (first) entry."""
        return self.entries[0].code
