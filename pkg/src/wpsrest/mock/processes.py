"""The three topology processes offered by the mock service."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from wpsrest.mock.geometry import (
    DegenerateGeometry,
    Rect,
    area,
    bounding_box,
    intersect,
    polygon_from_geojson,
    rect_to_geojson,
)
from wpsrest.wps.models import (
    BBoxValue,
    ComplexValue,
    DataValue,
    InputDescriptor,
    LiteralValue,
    OutputDescriptor,
    ProcessDescription,
)

NAMESPACE = "org.n52.wps.server.algorithm.topology"
AREA_ID = f"{NAMESPACE}.Area"
BOUNDING_BOX_ID = f"{NAMESPACE}.BoundingBox"
INTERSECT_ID = f"{NAMESPACE}.Intersect"

GEOJSON = "application/json"


class ProcessError(Exception):
    """Execution failure, reported to the client as a WPS exception."""

    def __init__(self, code: str, locator: str | None = None, text: str | None = None):
        super().__init__(text or code)
        self.code = code
        self.locator = locator
        self.text = text


Outputs = tuple[tuple[str, DataValue], ...]


@dataclass(frozen=True)
class Process:
    description: ProcessDescription
    run: Callable[[Mapping[str, Sequence[DataValue]]], Outputs]


def _polygon(inputs, name):
    value = inputs[name][0]
    try:
        return polygon_from_geojson(value.body)
    except DegenerateGeometry as exc:
        raise ProcessError("InvalidParameterValue", name, str(exc)) from None


def _rect(inputs, name) -> Rect:
    value = inputs[name][0]
    return Rect(value.minx, value.miny, value.maxx, value.maxy)


def _run_area(inputs) -> Outputs:
    return (("area", LiteralValue(repr(area(_polygon(inputs, "polygon"))), "double")),)


def _run_bounding_box(inputs) -> Outputs:
    box = bounding_box(_polygon(inputs, "polygon"))
    return (("bbox", BBoxValue(box.minx, box.miny, box.maxx, box.maxy, "EPSG:4326")),)


def _run_intersect(inputs) -> Outputs:
    overlap = intersect(_rect(inputs, "a"), _rect(inputs, "b"))
    body = json.dumps(rect_to_geojson(overlap), separators=(",", ":")).encode()
    return (("intersection", ComplexValue(GEOJSON, body=body)),)


_TAGS = ("topology",)

_polygon_input = InputDescriptor("polygon", "complex", supported_formats=(GEOJSON,))

PROCESSES: dict[str, Process] = {
    p.description.identifier: p
    for p in (
        Process(
            ProcessDescription(
                identifier=AREA_ID,
                title="Area",
                abstract="Planar area of a polygon, in squared coordinate units.",
                taxonomy_tags=_TAGS,
                inputs=(_polygon_input,),
                outputs=(OutputDescriptor("area", "literal", "double", ("text/plain",)),),
            ),
            _run_area,
        ),
        Process(
            ProcessDescription(
                identifier=BOUNDING_BOX_ID,
                title="Bounding box",
                abstract="Axis-aligned bounding box of a polygon.",
                taxonomy_tags=_TAGS,
                inputs=(_polygon_input,),
                outputs=(OutputDescriptor("bbox", "bounding-box", supported_formats=(GEOJSON,)),),
            ),
            _run_bounding_box,
        ),
        Process(
            ProcessDescription(
                identifier=INTERSECT_ID,
                title="Intersect",
                abstract="Intersection of two bounding boxes, as a GeoJSON geometry.",
                taxonomy_tags=_TAGS,
                inputs=(
                    InputDescriptor("a", "bounding-box", supported_formats=(GEOJSON,)),
                    InputDescriptor("b", "bounding-box", supported_formats=(GEOJSON,)),
                ),
                outputs=(OutputDescriptor("intersection", "complex", supported_formats=(GEOJSON,)),),
            ),
            _run_intersect,
        ),
    )
}


def check_inputs(desc: ProcessDescription, inputs: Sequence[tuple[str, DataValue]]) -> dict[str, list[DataValue]]:
    """Group inputs by identifier and check them against the descriptors."""
    grouped: dict[str, list[DataValue]] = {}
    for ident, value in inputs:
        spec = desc.input(ident)
        if spec is None:
            raise ProcessError("InvalidParameterValue", ident, f"process has no input named {ident!r}")
        expected = {"literal": LiteralValue, "complex": ComplexValue, "bounding-box": BBoxValue}[spec.kind]
        if not isinstance(value, expected):
            raise ProcessError("InvalidParameterValue", ident, f"input {ident!r} expects a {spec.kind} value")
        if isinstance(value, ComplexValue) and value.media_type not in spec.supported_formats:
            raise ProcessError("InvalidParameterValue", ident, f"unsupported format {value.media_type!r}")
        grouped.setdefault(ident, []).append(value)
    for spec in desc.inputs:
        count = len(grouped.get(spec.identifier, ()))
        if count < spec.min_occurs:
            raise ProcessError("MissingParameterValue", spec.identifier, f"input {spec.identifier!r} is required")
        if count > spec.max_occurs:
            raise ProcessError("InvalidParameterValue", spec.identifier, f"input {spec.identifier!r} occurs too often")
    return grouped
