import json
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, strategies as st

from wpsrest.resources import (
    HTML,
    JSON,
    REPRESENTATIONS,
    XML,
    MediaType,
    NotFound,
    ProcessSummary,
    ResourceId,
    ResourceState,
    TypedLink,
    links_for,
    negotiate,
    parse_links,
    path_for,
    render,
    route,
    uri_for,
)
from wpsrest.resources.links import similar_processes
from wpsrest.resources.negotiation import parse_accept

BASE = "http://api.test"

keys = st.text(st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=30)
rids = st.one_of(
    st.sampled_from([ResourceId("entry"), ResourceId("process_collection"), ResourceId("job_collection")]),
    st.builds(ResourceId, st.sampled_from(["process", "job", "job_result", "job_collection"]), keys),
)


@given(rids)
def test_route_inverts_path_for(rid):
    assert route(path_for(rid)) == rid


def test_identifiers_with_slashes_stay_one_segment():
    rid = ResourceId("process", "a/b c")
    assert path_for(rid) == "/processes/a%2Fb%20c"
    assert uri_for(rid, BASE + "/api/") == BASE + "/api/processes/a%2Fb%20c"


@pytest.mark.parametrize("path", ["", "/nope", "/processes/", "//jobs", "/jobs/x/result/y", "/processes/a/b"])
def test_off_scheme_paths(path):
    with pytest.raises(NotFound):
        route(path)


@pytest.mark.parametrize("kind, key", [("process", None), ("entry", "x"), ("bogus", None), ("job", "")])
def test_resource_id_invariants(kind, key):
    with pytest.raises(ValueError):
        ResourceId(kind, key)


# -- negotiation -------------------------------------------------------------


@pytest.mark.parametrize(
    "accept, expected",
    [
        (None, JSON),
        ("", JSON),
        ("*/*", JSON),
        ("application/xml", XML),
        ("text/html, application/json;q=0.5", HTML),
        ("application/json;q=0.2, */*;q=0.5", XML),
        ("application/json;q=0, */*", XML),
        ("image/png", None),
        ("application/json;q=0", None),
        ("TEXT/HTML", HTML),
    ],
)
def test_negotiate(accept, expected):
    assert negotiate(accept, REPRESENTATIONS) == expected


def test_unreadable_q_value_drops_the_range():
    assert parse_accept("text/html;q=abc, application/xml") == [MediaType("application/xml")]


@given(
    st.lists(st.sampled_from(["application/json", "application/xml", "text/html", "*/*", "x/y"]), min_size=1, max_size=4, unique=True),
    st.lists(st.floats(0, 1), min_size=4, max_size=4),
)
def test_negotiated_type_is_acceptable(ranges, qs):
    header = ", ".join(f"{r};q={q:.3f}" for r, q in zip(ranges, qs))
    chosen = negotiate(header, REPRESENTATIONS)
    accepted = {r: float(f"{q:.3f}") for r, q in zip(ranges, qs)}
    if chosen is not None:
        q = accepted.get(chosen.name, accepted.get("*/*"))
        assert q and q > 0


# -- links -------------------------------------------------------------------


def test_typed_links_validate():
    with pytest.raises(ValueError):
        TypedLink("friend", BASE + "/")
    with pytest.raises(ValueError):
        TypedLink("self", "/relative")


PROCS = (
    ProcessSummary("Area", "Area", ("topology",)),
    ProcessSummary("Intersect", "Intersect", ("topology",)),
    ProcessSummary("Buffer", "Buffer", ("proximity",)),
)


def test_similar_shares_a_tag():
    assert [p.identifier for p in similar_processes("Area", PROCS)] == ["Intersect"]


def rels(links):
    return [(link.rel, link.href) for link in links]


def test_entry_links():
    assert rels(links_for(ResourceId("entry"), BASE)) == [
        ("self", BASE + "/"),
        ("collection", BASE + "/processes"),
        ("collection", BASE + "/jobs"),
    ]


def test_process_links():
    links = rels(links_for(ResourceId("process", "Area"), BASE, ResourceState(PROCS)))
    assert ("execute", BASE + "/processes/Area/jobs") in links
    assert ("similar", BASE + "/processes/Intersect") in links
    assert ("up", BASE + "/processes") in links


@pytest.mark.parametrize(
    "status, rel, target",
    [("running", "monitor", "/jobs/j1"), ("succeeded", "results", "/jobs/j1/result"), ("failed", "similar", "/processes/Intersect")],
)
def test_job_links_follow_status(status, rel, target):
    state = ResourceState(PROCS, job_status=status, job_process="Area")
    assert (rel, BASE + target) in rels(links_for(ResourceId("job", "j1"), BASE, state))


@pytest.mark.parametrize("media", ["application/json", "application/xml", "text/html"])
def test_links_survive_every_representation(media):
    rid = ResourceId("process_collection")
    links = links_for(rid, BASE, ResourceState(PROCS))
    rep = render(rid, {"n": 1}, media, links)
    assert parse_links(rep.body, media) == links


def test_render_requires_one_self_link():
    with pytest.raises(ValueError):
        render(ResourceId("entry"), {}, "application/json", [])


def test_json_envelope_and_etag():
    rep = render(ResourceId("entry"), {"title": "x"}, "application/json", links_for(ResourceId("entry"), BASE))
    doc = json.loads(rep.body)
    assert doc["data"] == {"title": "x"}
    assert doc["links"][0] == {"rel": "self", "href": BASE + "/", "type": None}
    assert rep.etag.startswith('"') and len(rep.etag) == 66


def test_xml_representation_is_well_formed():
    rep = render(ResourceId("job", "j"), {"id": "j", "tags": ["a", "b"]}, "application/xml", links_for(ResourceId("job", "j"), BASE))
    root = ET.fromstring(rep.body)
    assert root.tag == "Job"


def test_parse_links_tolerates_garbage():
    assert parse_links(b"{not json", "application/json") == []
    assert parse_links(b"<a", "application/xml") == []
    assert parse_links(b"whatever", "image/png") == []
    body = b'<html><a rel="self item" href="/x">x</a><a rel="bogus" href="/y">y</a></html>'
    assert rels(parse_links(body, "text/html; charset=utf-8", BASE + "/")) == [
        ("self", BASE + "/x"),
        ("item", BASE + "/x"),
    ]
