"""Planar geometry behind the topology processes, plus the GeoJSON subset they speak."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass


class DegenerateGeometry(ValueError):
    pass


@dataclass(frozen=True)
class GeometryPolygon:
    """A single ring of vertices, implicitly closed (last vertex connects to the first)."""

    ring: tuple[tuple[float, float], ...]

    def __post_init__(self):
        try:
            ring = tuple((float(x), float(y)) for x, y in self.ring)
        except (TypeError, ValueError) as exc:
            raise DegenerateGeometry(f"vertices must be (x, y) number pairs: {exc}") from None
        if len(ring) < 3:
            raise DegenerateGeometry("a polygon needs at least three vertices")
        if not all(math.isfinite(c) for vertex in ring for c in vertex):
            raise DegenerateGeometry("vertex coordinates must be finite")
        for i, vertex in enumerate(ring):
            if vertex == ring[(i + 1) % len(ring)]:
                raise DegenerateGeometry(f"vertex {i} repeats its successor")
        object.__setattr__(self, "ring", ring)


@dataclass(frozen=True)
class Rect:
    minx: float
    miny: float
    maxx: float
    maxy: float

    def __post_init__(self):
        if not (self.minx <= self.maxx and self.miny <= self.maxy):
            raise DegenerateGeometry(f"not a rectangle: {self}")


def area(polygon: GeometryPolygon) -> float:
    """Shoelace area, always non-negative whatever the ring orientation."""
    ring = polygon.ring
    n = len(ring)
    twice = math.fsum(ring[i][0] * ring[(i + 1) % n][1] - ring[(i + 1) % n][0] * ring[i][1] for i in range(n))
    return abs(twice) / 2.0


def bounding_box(polygon: GeometryPolygon) -> Rect:
    xs = [x for x, _ in polygon.ring]
    ys = [y for _, y in polygon.ring]
    return Rect(min(xs), min(ys), max(xs), max(ys))


def intersect(a: Rect, b: Rect) -> Rect | None:
    """Overlap of two rectangles, or None when they are disjoint."""
    minx, miny = max(a.minx, b.minx), max(a.miny, b.miny)
    maxx, maxy = min(a.maxx, b.maxx), min(a.maxy, b.maxy)
    if minx > maxx or miny > maxy:
        return None
    return Rect(minx, miny, maxx, maxy)


# -- GeoJSON subset ----------------------------------------------------------


def polygon_from_geojson(doc: bytes | str | dict) -> GeometryPolygon:
    """Read a GeoJSON Polygon without holes. A repeated closing vertex is dropped."""
    if isinstance(doc, (bytes, str)):
        try:
            doc = json.loads(doc)
        except ValueError as exc:
            raise DegenerateGeometry(f"not JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("type") != "Polygon":
        raise DegenerateGeometry("expected a GeoJSON Polygon object")
    rings = doc.get("coordinates")
    if not isinstance(rings, list) or len(rings) != 1 or not isinstance(rings[0], list):
        raise DegenerateGeometry("expected exactly one linear ring (holes are not supported)")
    ring = []
    for position in rings[0]:
        if not isinstance(position, list) or len(position) < 2:
            raise DegenerateGeometry("positions must be [x, y] arrays")
        x, y = position[0], position[1]
        if isinstance(x, bool) or isinstance(y, bool) or not isinstance(x, (int, float)) or not isinstance(y, (int, float)):
            raise DegenerateGeometry("coordinates must be numbers")
        ring.append((float(x), float(y)))
    if len(ring) > 1 and ring[0] == ring[-1]:
        ring.pop()
    return GeometryPolygon(tuple(ring))


def polygon_to_geojson(polygon: GeometryPolygon) -> dict:
    ring = [list(v) for v in polygon.ring]
    ring.append(list(polygon.ring[0]))
    return {"type": "Polygon", "coordinates": [ring]}


def rect_to_geojson(rect: Rect | None) -> dict:
    if rect is None:
        return {"type": "GeometryCollection", "geometries": []}
    ring = [
        [rect.minx, rect.miny],
        [rect.maxx, rect.miny],
        [rect.maxx, rect.maxy],
        [rect.minx, rect.maxy],
        [rect.minx, rect.miny],
    ]
    return {"type": "Polygon", "coordinates": [ring]}
