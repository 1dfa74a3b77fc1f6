import json
import threading
from datetime import datetime, timedelta, timezone
from urllib.parse import quote

import pytest
from fastapi.testclient import TestClient

from tests.conftest import BASE, make_gateway
from wpsrest.gateway import (
    BackendUnavailable,
    CatalogCache,
    InputError,
    Job,
    JobStore,
    create_app,
    job_from_json,
    job_to_json,
    validate_inputs,
)
from wpsrest.gateway.backend import Catalog
from wpsrest.mock import AREA_ID, BOUNDING_BOX_ID, INTERSECT_ID, FaultConfig, MockWPS
from wpsrest.resources import parse_links
from wpsrest.wps import (
    BBoxValue,
    ComplexValue,
    ExceptionReport,
    ExecuteResult,
    InputDescriptor,
    LiteralValue,
    OutputDescriptor,
    ProcessBrief,
    ProcessDescription,
    ServiceCapabilities,
)

UNIT_SQUARE = {"type": "Polygon", "coordinates": [[[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]]}


def jobs_uri(pid):
    return f"/processes/{quote(pid, safe='')}/jobs"


def submit_area(client, polygon=UNIT_SQUARE, **kw):
    return client.post(jobs_uri(AREA_ID), json={"inputs": {"polygon": polygon}}, **kw)


def links(response):
    return {(link.rel, link.href) for link in parse_links(response.content, response.headers["content-type"])}


# -- resources ---------------------------------------------------------------


def test_entry_is_navigable(client):
    r = client.get("/")
    assert r.status_code == 200
    assert ("collection", BASE + "/processes") in links(r)
    assert r.headers["vary"] == "Accept"
    assert r.headers["link"] == f'<{BASE}/>; rel="self"'


def test_process_collection_lists_catalog(client):
    r = client.get("/processes")
    items = {href for rel, href in links(r) if rel == "item"}
    assert items == {f"{BASE}/processes/{pid}" for pid in (AREA_ID, BOUNDING_BOX_ID, INTERSECT_ID)}
    assert r.headers["cache-control"] == "max-age=3600"
    assert "last-modified" in r.headers and "etag" in r.headers


def test_process_representations(client):
    uri = f"/processes/{quote(AREA_ID, safe='')}"
    j = client.get(uri)
    assert j.json()["data"]["inputs"][0]["id"] == "polygon"
    x = client.get(uri, headers={"Accept": "application/xml"})
    assert x.headers["content-type"].startswith("application/xml")
    assert b"ProcessDescriptions" in x.content
    assert ("execute", BASE + jobs_uri(AREA_ID)) in links(x)
    h = client.get(uri, headers={"Accept": "text/html"})
    assert links(h) == links(j) == links(x)


def test_unknown_things_are_404(client):
    assert client.get("/nowhere").status_code == 404
    assert client.get("/processes/nope").status_code == 404
    assert client.get("/jobs/nope").status_code == 404
    assert client.get("/processes/nope/jobs").status_code == 404


def test_query_tunneling_is_refused(client):
    r = client.get("/?service=WPS&request=GetCapabilities")
    assert r.status_code == 400
    assert r.json()["data"]["code"] == "InvalidParameterValue"


@pytest.mark.parametrize(
    "method, path, allow",
    [
        ("POST", "/", "GET"),
        ("DELETE", "/processes", "GET"),
        ("PUT", "/jobs", "GET, POST"),
        ("PATCH", "/jobs/x", "GET, DELETE"),
        ("POST", "/jobs/x/result", "GET"),
    ],
)
def test_disallowed_verbs(client, method, path, allow):
    r = client.request(method, path)
    assert r.status_code == 405
    assert r.headers["allow"] == allow


def test_unsupported_accept(client):
    r = client.get("/", headers={"Accept": "image/png"})
    assert r.status_code == 406
    assert r.headers["content-type"] == "application/json"


def test_conditional_get(client):
    first = client.get("/processes")
    again = client.get("/processes", headers={"If-None-Match": first.headers["etag"]})
    assert again.status_code == 304 and again.content == b""
    assert again.headers["etag"] == first.headers["etag"]
    by_date = client.get("/processes", headers={"If-Modified-Since": first.headers["last-modified"]})
    assert by_date.status_code == 304


def test_etag_differs_per_representation(client):
    a = client.get("/", headers={"Accept": "application/json"}).headers["etag"]
    b = client.get("/", headers={"Accept": "application/xml"}).headers["etag"]
    assert a != b


# -- jobs --------------------------------------------------------------------


def test_job_lifecycle(client):
    r = submit_area(client)
    assert r.status_code == 201
    location = r.headers["location"]
    job = client.get(location)
    assert job.json()["data"]["status"] == "succeeded"
    assert job.headers["cache-control"] == "no-cache"
    assert "last-modified" not in job.headers
    assert ("results", location + "/result") in links(job)
    result = client.get(location + "/result")
    assert result.content == b"1.0"
    assert result.headers["content-type"] == "text/plain; charset=utf-8"
    # only the declared formats are offered
    assert client.get(location + "/result", headers={"Accept": "application/json"}).status_code == 406
    listing = client.get("/jobs")
    assert ("item", location) in links(listing)
    assert client.delete(location).status_code == 204
    assert client.delete(location).status_code == 404
    assert client.get(location).status_code == 404


def test_job_can_be_posted_to_the_global_collection(client):
    r = client.post("/jobs", json={"process": BOUNDING_BOX_ID, "inputs": {"polygon": UNIT_SQUARE}})
    assert r.status_code == 201
    assert json.loads(client.get(r.headers["location"] + "/result").content) == {
        "crs": "EPSG:4326",
        "bbox": [0.0, 0.0, 1.0, 1.0],
    }
    assert client.post("/jobs", json={"inputs": {}}).status_code == 400


def test_scoped_job_collection(client):
    submit_area(client)
    client.post(jobs_uri(INTERSECT_ID), json={"inputs": {"a": [0, 0, 1, 1], "b": [0, 0, 2, 2]}})
    scoped = client.get(jobs_uri(AREA_ID)).json()["data"]["jobs"]
    assert [j["process"] for j in scoped] == [AREA_ID]
    assert len(client.get("/jobs").json()["data"]["jobs"]) == 2


def test_selected_output_is_served(client):
    r = client.post(
        jobs_uri(INTERSECT_ID),
        json={"inputs": {"a": [0, 0, 2, 2], "b": {"bbox": [1, 1, 3, 3], "crs": "EPSG:4326"}}, "outputs": ["intersection"]},
    )
    result = client.get(r.headers["location"] + "/result")
    assert result.headers["content-type"] == "application/json"
    assert json.loads(result.content)["type"] == "Polygon"
    assert client.get(r.headers["location"] + "/result", headers={"Accept": "text/plain"}).status_code == 406


@pytest.mark.parametrize(
    "body, code, locator",
    [
        ({"inputs": {}}, "MissingParameterValue", "polygon"),
        ({"inputs": {"polygon": UNIT_SQUARE, "extra": 1}}, "InvalidParameterValue", "extra"),
        ({"inputs": {"polygon": {"href": "ftp://x/y"}}}, "InvalidParameterValue", "polygon"),
        ({"inputs": {"polygon": UNIT_SQUARE}, "outputs": ["nope"]}, "InvalidParameterValue", "outputs"),
        ({"inputs": [], "bogus": True}, "InvalidParameterValue", "body"),
    ],
)
def test_invalid_job_requests_are_400_and_create_nothing(client, gateway, body, code, locator):
    r = client.post(jobs_uri(AREA_ID), json=body)
    assert r.status_code == 400
    assert (r.json()["data"]["code"], r.json()["data"]["locator"]) == (code, locator)
    assert len(gateway.store) == 0


def test_malformed_json_body(client):
    r = client.post(jobs_uri(AREA_ID), content=b"{nope", headers={"Content-Type": "application/json"})
    assert r.status_code == 400


def test_backend_rejection_fails_the_job(client, gateway):
    degenerate = {"type": "Polygon", "coordinates": [[[0, 0], [1, 1], [0, 0]]]}
    r = submit_area(client, degenerate)
    assert r.status_code == 400
    (job,) = gateway.store.list()
    assert job.status == "failed" and job.exception.code == "InvalidParameterValue"
    assert ("monitor", f"{BASE}/jobs/{job.id}") in links(r)
    assert client.get(f"/jobs/{job.id}/result").status_code == 404


def test_server_busy_is_503_with_retry_after():
    gateway = make_gateway(retry_after=12)
    client = TestClient(create_app(gateway))
    client.get("/processes")  # warm the catalog while the backend is healthy
    busy = MockWPS("http://backend.test/wps", FaultConfig("server_busy"))
    gateway.backend.http._transport = busy.as_transport()
    r = submit_area(client)
    assert r.status_code == 503
    assert r.headers["retry-after"] == "12"
    assert r.json()["data"]["code"] == "ServerBusy"


def test_dropped_backend_connection_is_502(client, gateway):
    client.get("/processes")
    gateway.backend.http._transport = MockWPS("http://backend.test/wps", FaultConfig("drop_connection")).as_transport()
    r = submit_area(client)
    assert r.status_code == 502
    assert gateway.store.list()[0].exception.code == "NoApplicableCode"


def test_cold_catalog_with_dead_backend_is_503():
    client = TestClient(create_app(make_gateway(MockWPS("http://backend.test/wps", FaultConfig("drop_connection")))))
    r = client.get("/processes")
    assert r.status_code == 503 and r.headers["retry-after"] == "30"
    assert client.get("/").status_code == 200


def test_base_uri_with_path_prefix():
    client = TestClient(create_app(make_gateway(base_uri=BASE + "/api/v1")))
    r = client.get("/api/v1/")
    assert r.status_code == 200
    assert ("collection", BASE + "/api/v1/processes") in links(r)
    assert client.get("/api/v1/processes").status_code == 200


def test_gateway_is_stateless_across_instances():
    store = JobStore()
    first = TestClient(create_app(make_gateway(store=store)))
    location = submit_area(first).headers["location"]
    second = TestClient(create_app(make_gateway(store=store)))
    for path in (location, location + "/result", "/jobs"):
        a, b = first.get(path), second.get(path)
        assert (a.status_code, a.content) == (b.status_code, b.content)


class ReferenceBackend:
    """Backend double whose only process answers by reference."""

    desc = ProcessDescription(
        "Ref", outputs=(OutputDescriptor("out", "complex", supported_formats=("application/json",)),)
    )

    def get_capabilities(self):
        return ServiceCapabilities("t", "p", (ProcessBrief("Ref"),), "http://x/wps")

    def describe_process(self, ident):
        return self.desc

    def execute(self, req):
        return ExecuteResult("Ref", (("out", ComplexValue("application/json", href="http://store.test/out.json")),))


def test_reference_outputs_redirect():
    gateway = make_gateway()
    gateway.backend = ReferenceBackend()
    gateway.catalog = CatalogCache(gateway.backend, 60)
    client = TestClient(create_app(gateway))
    location = client.post("/processes/Ref/jobs", json={}).headers["location"]
    r = client.get(location + "/result", follow_redirects=False)
    assert r.status_code == 303 and r.headers["location"] == "http://store.test/out.json"


# -- catalog -----------------------------------------------------------------


class Clock:
    def __init__(self):
        self.now = datetime(2024, 1, 1, tzinfo=timezone.utc)

    def __call__(self):
        return self.now


class CountingBackend(ReferenceBackend):
    def __init__(self):
        self.calls = 0
        self.fail = False
        self.gate = None

    def get_capabilities(self):
        self.calls += 1
        if self.gate:
            self.gate.wait()
        if self.fail:
            raise BackendUnavailable("down")
        return super().get_capabilities()


def test_catalog_ttl_and_stale_fallback():
    backend, clock = CountingBackend(), Clock()
    cache = CatalogCache(backend, ttl=60, clock=clock)
    first = cache.current()
    assert cache.current() is first and backend.calls == 1
    clock.now += timedelta(seconds=61)
    second = cache.current()
    assert backend.calls == 2 and second.modified_at == first.modified_at
    backend.fail = True
    clock.now += timedelta(seconds=61)
    stale = cache.current()
    assert stale.stale and stale.processes == first.processes


def test_stale_catalog_adds_warning():
    gateway = make_gateway(cache_ttl=0.001)
    client = TestClient(create_app(gateway))
    client.get("/processes")
    gateway.catalog.client.http._transport = MockWPS("http://b/wps", FaultConfig("drop_connection")).as_transport()
    gateway.catalog.ttl = timedelta(0)
    r = client.get("/processes")
    assert r.status_code == 200 and r.headers["warning"].startswith("110")


def test_catalog_refresh_is_single_flight():
    backend, clock = CountingBackend(), Clock()
    cache = CatalogCache(backend, ttl=60, clock=clock)
    cache.current()
    clock.now += timedelta(seconds=61)
    backend.gate = threading.Event()
    results = []
    threads = [threading.Thread(target=lambda: results.append(cache.current())) for _ in range(8)]
    for t in threads:
        t.start()
    backend.gate.set()
    for t in threads:
        t.join()
    assert backend.calls == 2 and len(results) == 8


def test_cold_catalog_failure_raises():
    backend = CountingBackend()
    backend.fail = True
    with pytest.raises(BackendUnavailable):
        CatalogCache(backend, 60).current()


# -- inputs ------------------------------------------------------------------

DESCS = (
    InputDescriptor("n", "literal", "integer", ("text/plain",)),
    InputDescriptor("x", "literal", "double", ("text/plain",), 0, 3),
    InputDescriptor("box", "bounding-box", None, ("application/json",), 0, 2),
    InputDescriptor("doc", "complex", None, ("application/json",), 0, 1),
)


def test_validate_inputs_translates_values():
    values = validate_inputs(
        [("n", 3), ("x", [1.5, "2"]), ("box", [[0, 0, 1, 1], {"bbox": [1, 1, 2, 2], "crs": "EPSG:3857"}]), ("doc", [1, 2])],
        DESCS,
    )
    assert values == (
        ("n", LiteralValue("3", "integer")),
        ("x", LiteralValue("1.5", "double")),
        ("x", LiteralValue("2", "double")),
        ("box", BBoxValue(0, 0, 1, 1)),
        ("box", BBoxValue(1, 1, 2, 2, "EPSG:3857")),
        ("doc", ComplexValue("application/json", body=b"[1,2]")),
    )


@pytest.mark.parametrize(
    "submitted, code, locator",
    [
        ([], "MissingParameterValue", "n"),
        ([("n", 1.5)], "InvalidParameterValue", "n"),
        ([("n", True)], "InvalidParameterValue", "n"),
        ([("n", 1), ("x", "nan")], "InvalidParameterValue", "x"),
        ([("n", 1), ("x", [1, 2, 3, 4])], "InvalidParameterValue", "x"),
        ([("n", 1), ("box", [1, 1, 0, 0])], "InvalidParameterValue", "box"),
        ([("n", 1), ("box", [0, 0, 1])], "InvalidParameterValue", "box"),
        ([("n", 1), ("doc", {"href": "http://x/y", "type": "text/xml"})], "InvalidParameterValue", "doc"),
    ],
)
def test_validate_inputs_errors(submitted, code, locator):
    with pytest.raises(InputError) as info:
        validate_inputs(submitted, DESCS)
    assert (info.value.code, info.value.locator) == (code, locator)


# -- store and journal -------------------------------------------------------


def finished_job(pid="p", ok=True):
    job = Job.accepted(pid, (("a", BBoxValue(0, 0, 1, 1)), ("d", ComplexValue("x/y", body=b"\x00\xff"))))
    job = job.advance("running")
    if ok:
        return job.advance("succeeded", result=ExecuteResult(pid, (("o", LiteralValue("1.0", "double")),)))
    return job.advance("failed", exception=ExceptionReport.single("ServerBusy", None, "later"))


def test_job_json_round_trip():
    for ok in (True, False):
        job = finished_job(ok=ok)
        assert job_from_json(json.loads(json.dumps(job_to_json(job)))) == job


def test_job_state_machine():
    job = Job.accepted("p", ())
    with pytest.raises(ValueError):
        job.advance("succeeded", result=ExecuteResult("p", (("o", LiteralValue("1")),)))
    done = finished_job()
    with pytest.raises(ValueError):
        done.advance("running")


def test_journal_replay(tmp_path):
    path = tmp_path / "jobs.ndjson"
    store = JobStore(path)
    kept, dropped = finished_job(), finished_job(ok=False)
    store.insert(kept)
    store.insert(dropped)
    store.delete(dropped.id)
    with path.open("a") as fh:
        fh.write('{"id": "torn", "proc')  # crash mid-write
    replayed = JobStore(path)
    assert replayed.list() == [kept]
    assert replayed.digest() == store.digest()


def test_digest_tracks_content():
    store = JobStore()
    empty = store.digest()
    job = store.insert(Job.accepted("p", ()))
    assert store.digest() != empty
    store.delete(job.id)
    assert store.digest() == empty
