"""Accept-header negotiation over a server-ordered list of media types."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class MediaType:
    name: str
    quality: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.quality <= 1.0:
            raise ValueError("quality must lie in [0, 1]")

    def __str__(self) -> str:
        return self.name


JSON = MediaType("application/json")
XML = MediaType("application/xml")
HTML = MediaType("text/html")
REPRESENTATIONS = (JSON, XML, HTML)


def parse_accept(header: str) -> list[MediaType]:
    """Parse media ranges with their q-values. Ranges with an unreadable q are dropped."""
    ranges = []
    for part in header.split(","):
        name, *params = [p.strip() for p in part.split(";")]
        if not name:
            continue
        quality = 1.0
        for param in params:
            key, _, value = param.partition("=")
            if key.strip().lower() == "q":
                try:
                    quality = float(value)
                except ValueError:
                    quality = -1.0
        if 0.0 <= quality <= 1.0:
            ranges.append(MediaType(name.lower(), quality))
    return ranges


def negotiate(accept_header: str | None, supported: Sequence[MediaType | str]) -> MediaType | None:
    """Pick the supported type the client prefers most.

    An exact range outranks ``*/*`` for the same type; equal qualities fall
    back to the order of ``supported``. ``None`` means nothing is acceptable.
    """
    offers = [s if isinstance(s, MediaType) else MediaType(s) for s in supported]
    if not offers:
        raise ValueError("no supported media types")
    if not accept_header or not accept_header.strip():
        return offers[0]
    ranges = parse_accept(accept_header)
    exact = {}
    for r in ranges:
        exact.setdefault(r.name, r.quality)
    wildcard = exact.get("*/*")
    best, best_q = None, 0.0
    for offer in offers:
        q = exact.get(offer.name.lower(), wildcard)
        if q is not None and q > best_q:
            best, best_q = offer, q
    return best
