"""A deliberately old-fashioned WPS 1.0.0 endpoint.

The service reproduces the habits REST audits complain about: one endpoint
URI for every operation, HTTP 200 on every answer including exception
reports, no cache validators, and Execute accepted over GET. It is the raw
backend the gateway mediates and the baseline the auditor scores.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Mapping
from urllib.parse import urlsplit

import httpx

from wpsrest.mock.processes import PROCESSES, Process, ProcessError, check_inputs
from wpsrest.wps import (
    ComplexValue,
    DescribeProcess,
    ExceptionReport,
    Execute,
    ExecuteResult,
    GetCapabilities,
    MalformedDocument,
    MissingParameter,
    OperationRequest,
    ServiceCapabilities,
    UnknownOperation,
    WPSProtocolError,
    encode_capabilities,
    encode_exception_report,
    encode_execute_response,
    encode_process_descriptions,
    parse_kvp,
    parse_xml,
)

log = logging.getLogger(__name__)

FAULT_MODES = ("none", "server_busy", "drop_connection")
MAX_LATENCY_MS = 60_000
XML_CONTENT_TYPE = "text/xml; charset=utf-8"

Response = tuple[int, list[tuple[str, str]], bytes]


class ConnectionDropped(Exception):
    """The mock hangs up without answering (``drop_connection`` fault)."""


@dataclass(frozen=True)
class FaultConfig:
    mode: str = "none"
    added_latency: int = 0  # milliseconds

    def __post_init__(self):
        if self.mode not in FAULT_MODES:
            raise ValueError(f"unknown fault mode {self.mode!r}")
        if not 0 <= self.added_latency <= MAX_LATENCY_MS:
            raise ValueError(f"latency must be within [0, {MAX_LATENCY_MS}] ms")


def fetch_over_http(href: str) -> bytes:
    response = httpx.get(href, timeout=10.0, follow_redirects=True)
    response.raise_for_status()
    return response.content


@dataclass
class MockWPS:
    """Request handler for the simulated service, independent of any HTTP server."""

    endpoint_url: str = "http://localhost:8081/wps"
    fault: FaultConfig = field(default_factory=FaultConfig)
    fetch: Callable[[str], bytes] = fetch_over_http
    processes: Mapping[str, Process] = field(default_factory=lambda: dict(PROCESSES))

    @property
    def endpoint_path(self) -> str:
        return urlsplit(self.endpoint_url).path or "/"

    def capabilities(self) -> ServiceCapabilities:
        return ServiceCapabilities(
            title="Topology WPS",
            provider="wpsrest mock",
            process_briefs=tuple(p.description.brief() for p in self.processes.values()),
            endpoint=self.endpoint_url,
        )

    def handle_request(self, method: str, uri: str, headers: Mapping[str, str], body: bytes) -> Response:
        parts = urlsplit(uri)
        if (parts.path or "/") != self.endpoint_path:
            return 404, [("Content-Type", "text/plain; charset=utf-8")], b"Not Found"
        if self.fault.mode == "drop_connection":
            raise ConnectionDropped()
        if self.fault.added_latency:
            time.sleep(self.fault.added_latency / 1000.0)
        if method not in ("GET", "POST"):
            return 405, [("Allow", "GET, POST"), ("Content-Type", "text/plain; charset=utf-8")], b"Method Not Allowed"
        if self.fault.mode == "server_busy":
            return self._exception("ServerBusy", None, "the server is too busy to accept the request, retry later")
        try:
            req = parse_kvp(parts.query) if method == "GET" else parse_xml(body)
        except MissingParameter as exc:
            return self._exception("MissingParameterValue", exc.name, str(exc))
        except UnknownOperation as exc:
            return self._exception("OperationNotSupported", "request", str(exc))
        except MalformedDocument as exc:
            return self._exception("NoApplicableCode", None, f"request body is not well-formed XML: {exc}")
        except WPSProtocolError as exc:
            return self._exception("InvalidParameterValue", None, str(exc))
        try:
            return 200, [("Content-Type", XML_CONTENT_TYPE)], self.dispatch(req)
        except ProcessError as exc:
            return self._exception(exc.code, exc.locator, exc.text)

    def dispatch(self, req: OperationRequest) -> bytes:
        if isinstance(req, GetCapabilities):
            if req.service.upper() != "WPS":
                raise ProcessError("InvalidParameterValue", "service", f"unsupported service {req.service!r}")
            return encode_capabilities(self.capabilities())
        if isinstance(req, DescribeProcess):
            descs = [self._process(ident).description for ident in req.identifiers]
            return encode_process_descriptions(descs)
        return encode_execute_response(self.execute(req))

    def execute(self, req: Execute) -> ExecuteResult:
        process = self._process(req.process_id)
        inputs = [(ident, self._resolve(ident, value)) for ident, value in req.inputs]
        grouped = check_inputs(process.description, inputs)
        return ExecuteResult(req.process_id, process.run(grouped))

    def _process(self, ident: str) -> Process:
        try:
            return self.processes[ident]
        except KeyError:
            raise ProcessError("InvalidParameterValue", "identifier", f"no process named {ident!r}") from None

    def _resolve(self, ident, value):
        if not isinstance(value, ComplexValue) or value.href is None:
            return value
        try:
            return ComplexValue(value.media_type, body=self.fetch(value.href))
        except Exception as exc:  # any fetch failure is the backend's problem, not the client's
            raise ProcessError("NoApplicableCode", ident, f"could not retrieve {value.href}: {exc}") from None

    def _exception(self, code: str, locator: str | None, text: str | None) -> Response:
        body = encode_exception_report(ExceptionReport.single(code, locator, text))
        return 200, [("Content-Type", XML_CONTENT_TYPE)], body

    def as_transport(self) -> httpx.MockTransport:
        """Serve this mock to an in-process httpx client."""

        def handler(request: httpx.Request) -> httpx.Response:
            request.read()
            try:
                status, headers, body = self.handle_request(
                    request.method, str(request.url), request.headers, request.content
                )
            except ConnectionDropped:
                raise httpx.RemoteProtocolError("Server disconnected without sending a response.", request=request)
            return httpx.Response(status, headers=headers, content=body)

        return httpx.MockTransport(handler)


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "MockWPS/1.0"
    mock: MockWPS

    def _serve(self):
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else b""
        try:
            status, headers, payload = self.mock.handle_request(self.command, self.path, self.headers, body)
        except ConnectionDropped:
            self.close_connection = True
            return
        self.send_response(status)
        for name, value in headers:
            self.send_header(name, value)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        if self.command != "HEAD":
            self.wfile.write(payload)

    do_GET = do_POST = do_PUT = do_DELETE = do_PATCH = do_HEAD = do_OPTIONS = _serve

    def log_message(self, format, *args):
        log.debug("%s - %s", self.address_string(), format % args)


class _Server(ThreadingHTTPServer):
    # The stdlib backlog of 5 resets bursts of parallel clients.
    request_queue_size = 128
    daemon_threads = True


def make_server(mock: MockWPS, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Bind a threaded HTTP server for ``mock``; port 0 picks a free port."""
    handler = type("MockWPSHandler", (_Handler,), {"mock": mock})
    server = _Server((host, port), handler)
    return server


def serve_in_thread(mock: MockWPS, host: str = "127.0.0.1", port: int = 0) -> tuple[ThreadingHTTPServer, str]:
    """Start a server on a background thread and return it with its endpoint URL.

    The mock's ``endpoint_url`` is rewritten to the bound address so that
    capabilities documents advertise the real endpoint.
    """
    server = make_server(mock, host, port)
    bound_host, bound_port = server.server_address[:2]
    mock.endpoint_url = f"http://{bound_host}:{bound_port}{mock.endpoint_path}"
    threading.Thread(target=server.serve_forever, name="mock-wps", daemon=True).start()
    return server, mock.endpoint_url
