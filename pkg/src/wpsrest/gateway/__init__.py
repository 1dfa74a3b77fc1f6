"""The RESTful mediator in front of a WPS backend."""

from wpsrest.gateway.app import build_gateway, create_app, serve
from wpsrest.gateway.backend import (
    BackendError,
    BackendProtocolError,
    BackendUnavailable,
    Catalog,
    CatalogCache,
    WPSClient,
)
from wpsrest.gateway.config import GatewayConfig
from wpsrest.gateway.inputs import InputError, JobRequest, validate_inputs
from wpsrest.gateway.jobs import Job, JobStore, job_from_json, job_to_json
from wpsrest.gateway.service import Gateway, Response

__all__ = [
    "BackendError",
    "BackendProtocolError",
    "BackendUnavailable",
    "Catalog",
    "CatalogCache",
    "Gateway",
    "GatewayConfig",
    "InputError",
    "Job",
    "JobRequest",
    "JobStore",
    "Response",
    "WPSClient",
    "build_gateway",
    "create_app",
    "job_from_json",
    "job_to_json",
    "serve",
    "validate_inputs",
]
