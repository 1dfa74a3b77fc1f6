"""Exit criteria, each run against live servers and reported as one PASS/FAIL line."""

import functools
import json
import os
import signal
import subprocess
import sys
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from urllib.parse import quote, urlsplit

import httpx
import numpy as np
import pytest

from tests import test_geometry, test_wps_codecs
from tests.live import free_port, live_gateway, live_mock, wait_until_up
from wpsrest.auditor import run_audit
from wpsrest.mock import AREA_ID, BOUNDING_BOX_ID, INTERSECT_ID, FaultConfig
from wpsrest.mock.geometry import GeometryPolygon, area
from wpsrest.resources import parse_links

pytestmark = pytest.mark.acceptance

RESULTS: dict[int, str] = {}
PROCESS_IDS = (AREA_ID, BOUNDING_BOX_ID, INTERSECT_ID)
UNIT_SQUARE = {"type": "Polygon", "coordinates": [[[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]]}


def criterion(number: int, title: str):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException as exc:
                RESULTS[number] = f"criterion {number} FAIL  {title} ({type(exc).__name__}: {str(exc)[:120]})"
                print(RESULTS[number])
                raise
            RESULTS[number] = f"criterion {number} PASS  {title}"
            print(RESULTS[number])

        return run

    return wrap


def jobs_url(base, pid):
    return f"{base}/processes/{quote(pid, safe='')}/jobs"


@pytest.fixture(scope="module")
def servers():
    with live_mock() as (mock, backend):
        with live_gateway(backend) as (gateway, base):
            yield mock, backend, gateway, base


@criterion(1, "audit verdicts reproduce the raw WPS vs mediator tables")
def test_1_table_reproduction(servers):
    _, backend, _, base = servers
    start = time.monotonic()
    raw = run_audit(backend)
    mediated = run_audit(base + "/")
    elapsed = time.monotonic() - start
    probed = ["cache", "uniform_interface", "identification", "negotiation", "hypermedia", "status_codes", "safety"]
    assert {c: raw.check(c).verdict for c in probed} == {
        "cache": "no",
        "uniform_interface": "no",
        "identification": "partial",
        "negotiation": "no",
        "hypermedia": "no",
        "status_codes": "no",
        "safety": "no",
    }
    assert {c: mediated.check(c).verdict for c in probed} == dict.fromkeys(probed, "yes")
    assert run_audit(backend).verdicts() == raw.verdicts()
    assert elapsed < 30


@criterion(2, "codec round-trips (1000 per document kind) and 10^4-input fuzz corpus")
def test_2_codec_round_trips():
    for name in (
        "test_kvp_round_trip",
        "test_xml_request_round_trip",
        "test_capabilities_round_trip",
        "test_process_description_round_trip",
        "test_execute_response_round_trip",
        "test_exception_report_round_trip",
    ):
        prop = getattr(test_wps_codecs, name)
        assert prop.hypothesis.inner_test  # a hypothesis property
        assert test_wps_codecs.ROUND_TRIP.max_examples >= 1000
        prop()
    test_wps_codecs.test_parsers_survive_fuzz_corpus()


@criterion(3, "shoelace area within 1% of Monte-Carlo on 100 convex polygons; exact references")
def test_3_geometry_oracle():
    rng = np.random.default_rng(31337)
    polys = test_geometry.random_convex_polygons(100, seed=11)
    assert len(polys) == 100
    for verts in polys:
        exact = area(GeometryPolygon([tuple(map(float, v)) for v in verts]))
        assert abs(exact - test_geometry.monte_carlo_area(verts, rng)) / exact < 0.01
    assert area(GeometryPolygon([(0, 0), (1, 0), (1, 1), (0, 1)])) == 1.0
    assert area(GeometryPolygon([(0, 0), (4, 0), (0, 3)])) == 6.0


@criterion(4, "Area job through the mediator returns 201, succeeds, result is b'1.0'")
def test_4_end_to_end(servers):
    _, _, _, base = servers
    with httpx.Client() as http:
        r = http.post(jobs_url(base, AREA_ID), json={"inputs": {"polygon": UNIT_SQUARE}})
        assert r.status_code == 201
        location = r.headers["Location"]
        for _ in range(50):
            status = http.get(location).json()["data"]["status"]
            if status in ("succeeded", "failed"):
                break
            time.sleep(0.1)
        assert status == "succeeded"
        job = http.get(location)
        results = [link.href for link in parse_links(job.content, job.headers["content-type"]) if link.rel == "results"]
        assert http.get(results[0]).content == b"1.0"


@criterion(5, "HTTP conformance: 304, 400, 503+Retry-After, 204/404, 405+Allow, 406")
def test_5_http_conformance(servers):
    mock, _, _, base = servers
    with httpx.Client() as http:
        first = http.get(base + "/processes")
        etag = first.headers["ETag"]
        cond = http.get(base + "/processes", headers={"If-None-Match": etag})
        assert cond.status_code == 304 and cond.content == b"" and cond.headers["ETag"] == etag

        missing = http.post(jobs_url(base, INTERSECT_ID), json={"inputs": {"a": [0, 0, 1, 1]}})
        assert missing.status_code == 400 and missing.json()["data"]["code"] == "MissingParameterValue"

        mock.fault = FaultConfig("server_busy")
        try:
            busy = http.post(jobs_url(base, AREA_ID), json={"inputs": {"polygon": UNIT_SQUARE}})
        finally:
            mock.fault = FaultConfig()
        assert busy.status_code == 503 and busy.headers["Retry-After"] == "30"

        location = http.post(jobs_url(base, AREA_ID), json={"inputs": {"polygon": UNIT_SQUARE}}).headers["Location"]
        assert http.delete(location).status_code == 204
        assert http.delete(location).status_code == 404

        for method, path, allow in (("DELETE", "/processes", "GET"), ("PUT", "/jobs", "GET, POST")):
            r = http.request(method, base + path)
            assert r.status_code == 405 and r.headers["Allow"] == allow

        assert http.get(base + "/", headers={"Accept": "image/png"}).status_code == 406


@criterion(6, "link crawl from / reaches all processes and a live job within 3 hops; no local 5xx")
def test_6_hypermedia_closure(servers):
    _, _, _, base = servers
    origin = urlsplit(base).netloc
    with httpx.Client() as http:
        job = http.post(jobs_url(base, AREA_ID), json={"inputs": {"polygon": UNIT_SQUARE}}).headers["Location"]
        depth = {base + "/": 0}
        queue = deque([base + "/"])
        hrefs = set()
        while queue:
            url = queue.popleft()
            r = http.get(url)
            for link in parse_links(r.content, r.headers.get("content-type"), url):
                if urlsplit(link.href).netloc != origin:
                    continue
                hrefs.add(link.href)
                if link.href not in depth and depth[url] < 3:
                    depth[link.href] = depth[url] + 1
                    queue.append(link.href)
        for pid in PROCESS_IDS:
            assert depth[f"{base}/processes/{quote(pid, safe='')}"] <= 3
        assert depth[job] <= 3
        for href in hrefs:
            assert http.get(href).status_code < 500, href


@criterion(7, "100 parallel POSTs make 100 distinct jobs; GET storms leave the store digest unchanged")
def test_7_concurrency(servers):
    _, _, gateway, base = servers
    before = len(gateway.store)
    limits = httpx.Limits(max_connections=100, max_keepalive_connections=100)
    with httpx.Client(limits=limits, timeout=60) as http:

        def post(i):
            body = {"inputs": {"a": [0, 0, i + 1, i + 1], "b": [0.5, 0.5, 2 * i + 1, 2 * i + 1]}}
            return http.post(jobs_url(base, INTERSECT_ID), json=body)

        with ThreadPoolExecutor(100) as pool:
            responses = list(pool.map(post, range(100)))
        assert [r.status_code for r in responses] == [201] * 100
        ids = {r.headers["Location"] for r in responses}
        assert len(ids) == 100
        assert len(gateway.store) == before + 100

        digest = gateway.store.digest()
        targets = [base + "/", base + "/jobs", base + "/processes", *list(ids)[:20]]
        targets += [u + "/result" for u in list(ids)[:20]]
        for _ in range(3):
            with ThreadPoolExecutor(50) as pool:
                codes = list(pool.map(lambda u: http.get(u).status_code, targets * 5))
            assert all(c == 200 for c in codes)
            assert gateway.store.digest() == digest


def _spawn_gateway(port, backend, journal):
    cmd = [
        sys.executable, "-m", "wpsrest", "gateway",
        "--port", str(port), "--backend", backend,
        "--base-uri", f"http://127.0.0.1:{port}", "--journal", str(journal),
    ]
    return subprocess.Popen(cmd, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)


def _snapshot(http, base):
    listing = http.get(base + "/jobs").json()["data"]["jobs"]
    return {j["id"]: http.get(f"{base}/jobs/{j['id']}").json()["data"] for j in listing}


@criterion(8, "journal replay after kill -9 restores the job set field for field")
def test_8_journal_replay(tmp_path):
    journal = tmp_path / "jobs.ndjson"
    with live_mock() as (mock, backend):
        port = free_port()
        base = f"http://127.0.0.1:{port}"
        proc = _spawn_gateway(port, backend, journal)
        try:
            wait_until_up(base + "/")
            with httpx.Client(timeout=30) as http:
                for i in range(5):
                    http.post(jobs_url(base, AREA_ID), json={"inputs": {"polygon": UNIT_SQUARE}})
                degenerate = {"type": "Polygon", "coordinates": [[[0, 0], [1, 1], [0, 0]]]}
                assert http.post(jobs_url(base, AREA_ID), json={"inputs": {"polygon": degenerate}}).status_code == 400
                doomed = http.post(jobs_url(base, BOUNDING_BOX_ID), json={"inputs": {"polygon": UNIT_SQUARE}})
                assert http.delete(doomed.headers["Location"]).status_code == 204
                before = _snapshot(http, base)
        finally:
            proc.send_signal(signal.SIGKILL)
            proc.wait(10)
        assert len(before) == 6
        assert {j["status"] for j in before.values()} == {"succeeded", "failed"}

        proc = _spawn_gateway(port, backend, journal)
        try:
            wait_until_up(base + "/")
            with httpx.Client(timeout=30) as http:
                after = _snapshot(http, base)
        finally:
            proc.terminate()
            proc.wait(10)
    assert after == before


def teardown_module(module):
    if RESULTS:
        print("\n" + "\n".join(RESULTS[k] for k in sorted(RESULTS)))
