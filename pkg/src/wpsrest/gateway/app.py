"""FastAPI adapter: every request goes to :meth:`Gateway.handle` unchanged."""

from __future__ import annotations

import httpx
import uvicorn
from fastapi import FastAPI, Request
from fastapi.responses import Response as HTTPResponse
from starlette.concurrency import run_in_threadpool

from wpsrest.gateway.backend import WPSClient
from wpsrest.gateway.config import GatewayConfig
from wpsrest.gateway.jobs import JobStore
from wpsrest.gateway.service import Gateway

KEEP_ALIVE = 30
METHODS = ["GET", "POST", "PUT", "PATCH", "DELETE", "HEAD", "OPTIONS"]


def build_gateway(config: GatewayConfig, http: httpx.Client | None = None, store: JobStore | None = None) -> Gateway:
    http = http or httpx.Client(timeout=config.backend_timeout)
    return Gateway(config, WPSClient(http, config.backend), store)


def create_app(gateway: Gateway) -> FastAPI:
    app = FastAPI(title="wpsrest gateway", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.gateway = gateway

    # One catch-all route: the URI scheme and verb rules live in the gateway so the
    # framework cannot answer 404/405 with bodies of its own.
    @app.api_route("/{path:path}", methods=METHODS, include_in_schema=False)
    async def dispatch(request: Request) -> HTTPResponse:
        target = request.scope.get("raw_path", request.url.path.encode()).decode("latin-1")
        query = request.scope.get("query_string", b"").decode("latin-1")
        if query:
            target += "?" + query
        body = await request.body()
        result = await run_in_threadpool(gateway.handle, request.method, target, request.headers, body)
        response = HTTPResponse(content=result.body, status_code=result.status)
        for name, value in result.headers:
            response.headers.append(name, value)
        return response

    return app


def serve(config: GatewayConfig) -> None:
    app = create_app(build_gateway(config))
    uvicorn.run(app, host=config.host, port=config.port, log_level="info", timeout_keep_alive=KEEP_ALIVE)
