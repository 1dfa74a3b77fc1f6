import warnings

import httpx
import pytest

warnings.filterwarnings("ignore", message="Using `httpx` with `starlette.testclient` is deprecated")

from fastapi.testclient import TestClient  # noqa: E402

from wpsrest.gateway import GatewayConfig, JobStore, build_gateway, create_app  # noqa: E402
from wpsrest.mock import MockWPS  # noqa: E402

BACKEND = "http://backend.test/wps"
BASE = "http://testserver"


def make_gateway(mock=None, store=None, **config):
    mock = mock or MockWPS(BACKEND)
    cfg = GatewayConfig(base_uri=config.pop("base_uri", BASE), backend=BACKEND, **config)
    return build_gateway(cfg, httpx.Client(transport=mock.as_transport()), store if store is not None else JobStore())


@pytest.fixture
def gateway():
    return make_gateway()


@pytest.fixture
def client(gateway):
    return TestClient(create_app(gateway))


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[number])
