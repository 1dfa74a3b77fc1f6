"""Simulated WPS 1.0.0 backend with topology processes and fault injection."""

from wpsrest.mock.geometry import (
    DegenerateGeometry,
    GeometryPolygon,
    Rect,
    area,
    bounding_box,
    intersect,
    polygon_from_geojson,
    polygon_to_geojson,
    rect_to_geojson,
)
from wpsrest.mock.processes import AREA_ID, BOUNDING_BOX_ID, INTERSECT_ID, PROCESSES
from wpsrest.mock.server import FaultConfig, MockWPS, make_server, serve_in_thread

__all__ = [
    "AREA_ID",
    "BOUNDING_BOX_ID",
    "DegenerateGeometry",
    "FaultConfig",
    "GeometryPolygon",
    "INTERSECT_ID",
    "MockWPS",
    "PROCESSES",
    "Rect",
    "area",
    "bounding_box",
    "intersect",
    "make_server",
    "polygon_from_geojson",
    "polygon_to_geojson",
    "rect_to_geojson",
    "serve_in_thread",
]
