"""Job submissions: the JSON request body and its translation into WPS inputs.

Values follow the declared kind of each input:

* literal: a JSON string or number;
* bounding-box: ``[minx, miny, maxx, maxy]`` or ``{"bbox": [...], "crs": "..."}``;
* complex: any JSON document (sent as ``application/json``), or
  ``{"href": "...", "type": "..."}`` to pass a reference.

For literal and bounding-box inputs a JSON array of values supplies repeated
occurrences.
"""

from __future__ import annotations

import json
import math
from typing import Any, Iterable, Sequence
from urllib.parse import urlsplit

from pydantic import BaseModel, ConfigDict

from wpsrest.wps.models import (
    BBoxValue,
    ComplexValue,
    DataValue,
    InputDescriptor,
    InvariantViolation,
    LiteralValue,
    ProcessDescription,
)


class JobRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    inputs: dict[str, Any] = {}
    outputs: list[str] | None = None
    process: str | None = None


class InputError(ValueError):
    def __init__(self, code: str, locator: str, text: str):
        super().__init__(text)
        self.code = code
        self.locator = locator
        self.text = text


def _invalid(locator: str, text: str) -> InputError:
    return InputError("InvalidParameterValue", locator, text)


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _literal(ident: str, raw, datatype: str) -> LiteralValue:
    if isinstance(raw, str):
        text = raw
    elif isinstance(raw, int) and not isinstance(raw, bool):
        text = str(raw)
    elif isinstance(raw, float):
        text = repr(raw)
    else:
        raise _invalid(ident, f"{ident}: expected a string or number")
    try:
        if datatype == "double" and not math.isfinite(float(text)):
            raise ValueError("not finite")
        if datatype == "integer":
            int(text.strip())
    except ValueError:
        raise _invalid(ident, f"{ident}: {text!r} is not a valid {datatype}") from None
    try:
        return LiteralValue(text, datatype)
    except InvariantViolation as exc:
        raise _invalid(ident, f"{ident}: {exc}") from None


def _bbox(ident: str, raw) -> BBoxValue:
    crs = "EPSG:4326"
    if isinstance(raw, dict):
        crs = raw.get("crs", crs)
        raw = raw.get("bbox")
        if not isinstance(crs, str) or not crs:
            raise _invalid(ident, f"{ident}: crs must be a non-empty string")
    if not (isinstance(raw, list) and len(raw) == 4 and all(_is_number(x) for x in raw)):
        raise _invalid(ident, f"{ident}: expected [minx, miny, maxx, maxy]")
    if not all(math.isfinite(x) for x in raw):
        raise _invalid(ident, f"{ident}: coordinates must be finite")
    try:
        return BBoxValue(*raw, crs=crs)
    except InvariantViolation as exc:
        raise _invalid(ident, f"{ident}: {exc}") from None


def _complex(ident: str, raw, formats: Sequence[str]) -> ComplexValue:
    if isinstance(raw, dict) and "href" in raw:
        href, media = raw["href"], raw.get("type", formats[0] if formats else None)
        parts = urlsplit(href) if isinstance(href, str) else None
        if parts is None or parts.scheme not in ("http", "https") or not parts.netloc:
            raise _invalid(ident, f"{ident}: href must be an absolute http(s) URI")
        if not isinstance(media, str) or media not in formats:
            raise _invalid(ident, f"{ident}: type must be one of {', '.join(formats)}")
        return ComplexValue(media, href=href)
    if "application/json" not in formats:
        raise _invalid(ident, f"{ident}: embedded JSON is not accepted, formats are {', '.join(formats)}")
    try:
        body = json.dumps(raw, separators=(",", ":"), allow_nan=False).encode("utf-8")
    except ValueError:
        raise _invalid(ident, f"{ident}: value is not valid JSON") from None
    return ComplexValue("application/json", body=body)


def _occurrences(desc: InputDescriptor, raw) -> list[DataValue]:
    ident = desc.identifier
    if desc.kind == "literal":
        items = raw if isinstance(raw, list) else [raw]
        return [_literal(ident, item, desc.datatype or "string") for item in items]
    if desc.kind == "bounding-box":
        repeated = isinstance(raw, list) and raw and all(isinstance(x, (list, dict)) for x in raw)
        items = raw if repeated else [raw]
        return [_bbox(ident, item) for item in items]
    return [_complex(ident, raw, desc.supported_formats)]


def validate_inputs(
    submitted: Iterable[tuple[str, Any]], descriptors: Sequence[InputDescriptor]
) -> tuple[tuple[str, DataValue], ...]:
    """Check a submission against the process's declared inputs.

    Raises InputError carrying MissingParameterValue or
    InvalidParameterValue; nothing is sent to the backend in that case.
    """
    by_id = {d.identifier: d for d in descriptors}
    out: list[tuple[str, DataValue]] = []
    counts = dict.fromkeys(by_id, 0)
    for ident, raw in submitted:
        desc = by_id.get(ident)
        if desc is None:
            raise _invalid(ident, f"unknown input {ident!r}")
        values = _occurrences(desc, raw)
        counts[ident] += len(values)
        out.extend((ident, v) for v in values)
    for desc in descriptors:
        n = counts[desc.identifier]
        if n < desc.min_occurs:
            raise InputError("MissingParameterValue", desc.identifier, f"input {desc.identifier!r} is required")
        if n > desc.max_occurs:
            raise _invalid(desc.identifier, f"input {desc.identifier!r} occurs at most {desc.max_occurs} times")
    return tuple(out)


def validate_outputs(requested: Sequence[str] | None, process: ProcessDescription) -> tuple[str, ...]:
    if not requested:
        return ()
    known = {o.identifier for o in process.outputs}
    for ident in requested:
        if ident not in known:
            raise _invalid("outputs", f"unknown output {ident!r}")
    return tuple(dict.fromkeys(requested))
