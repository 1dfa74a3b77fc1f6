"""Hypothesis strategies for the WPS document model."""

from hypothesis import strategies as st

from wpsrest.wps.models import (
    BBoxValue,
    ComplexValue,
    DescribeProcess,
    ExceptionEntry,
    ExceptionReport,
    Execute,
    ExecuteResult,
    GetCapabilities,
    InputDescriptor,
    LiteralValue,
    OutputDescriptor,
    ProcessBrief,
    ProcessDescription,
    ServiceCapabilities,
)

_ILLEGAL = [chr(c) for c in range(0x20) if c not in (0x09, 0x0A, 0x0D)] + ["￾", "￿"]
xml_chars = st.characters(blacklist_categories=("Cs",), blacklist_characters=_ILLEGAL)

text = st.text(xml_chars, max_size=20)
nonblank = text.filter(lambda s: s.strip() != "")
idents = st.one_of(
    st.from_regex(r"[A-Za-z][A-Za-z0-9_.]{0,30}", fullmatch=True),
    nonblank,
)
media_types = st.sampled_from(["application/json", "text/xml", "application/gml+xml", "text/plain", "image/png"])
hrefs = st.builds(lambda p: "http://example.org/" + p, st.from_regex(r"[a-z0-9/_.-]{0,20}", fullmatch=True))
coords = st.floats(allow_nan=False, width=64)


@st.composite
def bboxes(draw):
    xs = sorted([draw(coords), draw(coords)])
    ys = sorted([draw(coords), draw(coords)])
    crs = draw(st.one_of(st.just("EPSG:4326"), st.just("urn:ogc:def:crs:EPSG::3857"), text))
    return BBoxValue(xs[0], ys[0], xs[1], ys[1], crs)


literals = st.builds(LiteralValue, text, st.sampled_from(["double", "integer", "string"]))
complex_embedded = st.builds(lambda m, b: ComplexValue(m, body=b), media_types, st.binary(max_size=64))
complex_utf8 = st.builds(lambda m, t: ComplexValue(m, body=t.encode("utf-8")), media_types, text)
complex_ref = st.builds(lambda m, h: ComplexValue(m, href=h), media_types, hrefs)

# values that a query string can carry
kvp_values = st.one_of(literals, bboxes(), complex_ref)
values = st.one_of(literals, bboxes(), complex_embedded, complex_utf8, complex_ref)


def executes(value_strategy=values):
    pairs = st.lists(st.tuples(idents, value_strategy), max_size=5)
    return st.builds(Execute, idents, pairs.map(tuple), st.sampled_from(["by-value", "by-reference"]))


def requests(value_strategy=values):
    return st.one_of(
        st.builds(GetCapabilities, nonblank),
        st.builds(DescribeProcess, st.lists(idents, min_size=1, max_size=4).map(tuple)),
        executes(value_strategy),
    )


@st.composite
def capabilities(draw):
    ids = draw(st.lists(idents, min_size=1, max_size=5, unique=True))
    briefs = tuple(ProcessBrief(i, draw(text)) for i in ids)
    return ServiceCapabilities(draw(text), draw(text), briefs, draw(hrefs))


@st.composite
def _descriptor(draw, cls):
    kind = draw(st.sampled_from(["literal", "complex", "bounding-box"]))
    datatype = draw(st.sampled_from(["double", "integer", "string"])) if kind == "literal" else None
    formats = tuple(draw(st.lists(media_types, min_size=1, max_size=3, unique=True)))
    if cls is InputDescriptor:
        lo = draw(st.integers(0, 3))
        hi = draw(st.integers(lo, 5))
        return InputDescriptor(draw(idents), kind, datatype, formats, lo, hi)
    return OutputDescriptor(draw(idents), kind, datatype, formats)


@st.composite
def process_descriptions(draw):
    inputs = draw(st.lists(_descriptor(InputDescriptor), max_size=4, unique_by=lambda d: d.identifier))
    outputs = draw(st.lists(_descriptor(OutputDescriptor), min_size=1, max_size=3))
    return ProcessDescription(
        draw(idents),
        draw(text),
        draw(st.one_of(st.none(), text)),
        tuple(draw(st.lists(nonblank, max_size=3))),
        tuple(inputs),
        tuple(outputs),
    )


execute_results = st.builds(
    ExecuteResult, idents, st.lists(st.tuples(idents, values), min_size=1, max_size=4).map(tuple)
)

exception_entries = st.builds(
    ExceptionEntry,
    st.one_of(
        st.sampled_from(["MissingParameterValue", "InvalidParameterValue", "ServerBusy", "NoApplicableCode"]),
        idents,
    ),
    st.one_of(st.none(), text),
    st.one_of(st.none(), text),
)
exception_reports = st.builds(ExceptionReport, st.lists(exception_entries, min_size=1, max_size=4).map(tuple))
