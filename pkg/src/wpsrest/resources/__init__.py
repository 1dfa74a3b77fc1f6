"""Resource-oriented face of the mediator: URIs, links, negotiation, rendering."""

from wpsrest.resources.links import (
    RELATIONS,
    ProcessSummary,
    ResourceState,
    TypedLink,
    links_for,
    parse_links,
)
from wpsrest.resources.negotiation import HTML, JSON, REPRESENTATIONS, XML, MediaType, negotiate
from wpsrest.resources.render import ProcessList, Representation, render, to_data, to_element
from wpsrest.resources.uris import NotFound, ResourceId, path_for, route, uri_for

__all__ = [
    "HTML",
    "JSON",
    "MediaType",
    "NotFound",
    "ProcessList",
    "ProcessSummary",
    "RELATIONS",
    "REPRESENTATIONS",
    "Representation",
    "ResourceId",
    "ResourceState",
    "TypedLink",
    "XML",
    "links_for",
    "negotiate",
    "parse_links",
    "path_for",
    "render",
    "route",
    "to_data",
    "to_element",
    "uri_for",
]
