from __future__ import annotations

from pathlib import Path
from urllib.parse import urlsplit

from pydantic import BaseModel, ConfigDict, Field, field_validator


class GatewayConfig(BaseModel):
    """Runtime settings of the REST mediator."""

    model_config = ConfigDict(frozen=True)

    host: str = "127.0.0.1"
    port: int = Field(8080, ge=0, le=65535)
    base_uri: str = "http://127.0.0.1:8080"
    backend: str = "http://127.0.0.1:8081/wps"
    cache_ttl: float = Field(300.0, gt=0, description="seconds before the process catalog is refreshed")
    retry_after: int = Field(30, ge=0, description="Retry-After seconds sent when the backend is busy")
    journal: Path | None = None
    backend_timeout: float = Field(30.0, gt=0)

    @field_validator("base_uri", "backend")
    @classmethod
    def _absolute_http(cls, value: str) -> str:
        parts = urlsplit(value)
        if parts.scheme not in ("http", "https") or not parts.netloc:
            raise ValueError(f"expected an absolute http(s) URI, got {value!r}")
        return value
