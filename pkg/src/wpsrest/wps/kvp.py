"""KVP (GET query string) binding for WPS operation requests.

Layout of the emitted query: ``service`` and ``request`` first, then the
variant-specific keys in alphabetical order. Execute inputs travel in a
single ``datainputs`` value::

    id=value@attr=value;id=value@attr=value

where every component is percent-encoded on its own and the joined value is
percent-encoded once more so that no bare ``=`` or ``;`` leaks into the
query. Only literals, bounding boxes and by-reference complex inputs can be
carried; an embedded document body cannot.
"""

from __future__ import annotations

from urllib.parse import quote, unquote, unquote_plus

from wpsrest.wps.errors import (
    InvariantViolation,
    MissingParameter,
    SchemaViolation,
    UnencodableRequest,
    UnknownOperation,
)
from wpsrest.wps.models import (
    BBoxValue,
    ComplexValue,
    DataValue,
    DescribeProcess,
    Execute,
    GetCapabilities,
    LiteralValue,
    OperationRequest,
)

_OPERATIONS = {
    "getcapabilities": "GetCapabilities",
    "describeprocess": "DescribeProcess",
    "execute": "Execute",
}


def _q(value: str) -> str:
    return quote(value, safe="")


def _encode_input(identifier: str, value: DataValue) -> str:
    head = _q(identifier) + "="
    if isinstance(value, LiteralValue):
        return f"{head}{_q(value.text)}@datatype={_q(value.datatype)}"
    if isinstance(value, BBoxValue):
        coords = ",".join(_q(repr(c)) for c in value.bounds)
        return f"{head}{coords}@crs={_q(value.crs)}"
    if value.href is None:
        raise UnencodableRequest(f"input {identifier!r} embeds a document body; KVP only carries references")
    return f"{head}@href={_q(value.href)}@mimetype={_q(value.media_type)}"


def encode_kvp(req: OperationRequest) -> str:
    """Encode a request as a query string (without the leading ``?``)."""
    if isinstance(req, GetCapabilities):
        return f"service={_q(req.service)}&request=GetCapabilities"
    if isinstance(req, DescribeProcess):
        idents = ",".join(_q(i) for i in req.identifiers)
        return f"service=WPS&request=DescribeProcess&identifier={idents}"
    if isinstance(req, Execute):
        pairs = []
        if req.inputs:
            inputs = ";".join(_encode_input(i, v) for i, v in req.inputs)
            pairs.append(("datainputs", _q(inputs)))
        pairs.append(("identifier", _q(req.process_id)))
        pairs.append(("responseform", req.response_form))
        tail = "&".join(f"{k}={v}" for k, v in pairs)
        return f"service=WPS&request=Execute&{tail}"
    raise TypeError(f"not an operation request: {req!r}")


def _split_query(query: str) -> dict[str, str]:
    """Map lower-cased keys to their still-encoded values; first occurrence wins."""
    params: dict[str, str] = {}
    for part in query.lstrip("?").split("&"):
        if not part:
            continue
        key, _, value = part.partition("=")
        params.setdefault(unquote_plus(key).strip().lower(), value)
    return params


def _require(params: dict[str, str], key: str) -> str:
    raw = params.get(key, "")
    if not raw:
        raise MissingParameter(key)
    return raw


def _decode_input(entry: str) -> tuple[str, DataValue]:
    head, *attr_parts = entry.split("@")
    if "=" not in head:
        raise SchemaViolation(f"data input {entry!r} lacks an '=' separator")
    ident, _, raw_value = head.partition("=")
    attrs = {}
    for part in attr_parts:
        key, sep, val = part.partition("=")
        if not sep:
            raise SchemaViolation(f"malformed data input attribute {part!r}")
        attrs[unquote(key).lower()] = unquote(val)
    ident = unquote(ident)
    value = unquote(raw_value)
    if "href" in attrs:
        return ident, ComplexValue(media_type=attrs.get("mimetype", "application/octet-stream"), href=attrs["href"])
    if "crs" in attrs:
        coords = raw_value.split(",")
        if len(coords) != 4:
            raise SchemaViolation(f"bounding box input {ident!r} needs four coordinates")
        try:
            numbers = [float(unquote(c)) for c in coords]
        except ValueError:
            raise SchemaViolation(f"bounding box input {ident!r} has non-numeric coordinates") from None
        return ident, BBoxValue(*numbers, crs=attrs["crs"])
    return ident, LiteralValue(value, attrs.get("datatype", "string"))


def parse_kvp(query: str) -> OperationRequest:
    """Parse a query string into a request; keys and operation names are case-insensitive."""
    params = _split_query(query)
    raw_op = unquote_plus(_require(params, "request"))
    op = _OPERATIONS.get(raw_op.strip().lower())
    if op is None:
        raise UnknownOperation(raw_op)
    service = unquote_plus(_require(params, "service"))
    try:
        if op == "GetCapabilities":
            return GetCapabilities(service)
        if op == "DescribeProcess":
            idents = [unquote_plus(i) for i in _require(params, "identifier").split(",")]
            return DescribeProcess(tuple(idents))
        process_id = unquote_plus(_require(params, "identifier"))
        inputs = []
        raw_inputs = unquote_plus(params.get("datainputs", ""))
        for entry in raw_inputs.split(";") if raw_inputs else ():
            inputs.append(_decode_input(entry))
        form = unquote_plus(params.get("responseform", "")).strip().lower() or "by-value"
        return Execute(process_id, tuple(inputs), form)
    except InvariantViolation as exc:
        raise SchemaViolation(str(exc)) from exc
