"""A RESTful mediator for OGC WPS 1.0.0 services, a simulated WPS backend, and a REST audit tool."""

__version__ = "0.1.0"
