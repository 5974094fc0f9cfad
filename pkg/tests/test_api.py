import json
import urllib.error
import urllib.request

import pytest

from redcohort.api import SessionServer, serve_session
from redcohort.ranking import RankingParams
from redcohort.session import create_session

from conftest import make_index


def topic_session(top_terms=3):
    index = make_index(
        {
            "t1": ["quartz agate quartz agate jasper"],
            "t2": ["quartz agate quartz agate jasper"],
            "b1": ["dirt mud dirt mud dirt"],
            "b2": ["mud dirt mud"],
        }
    )
    return create_session(
        index, ["quartz"], RankingParams(alpha=1.0, top_docs=2, top_terms=top_terms)
    )


@pytest.fixture
def server():
    srv = serve_session(topic_session())
    yield srv
    srv.shutdown()


def get(srv, path):
    try:
        with urllib.request.urlopen(
            f"http://127.0.0.1:{srv.port}{path}", timeout=10
        ) as r:
            return r.status, json.loads(r.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


def post(srv, path, payload=None):
    data = json.dumps(payload).encode() if payload is not None else b""
    req = urllib.request.Request(
        f"http://127.0.0.1:{srv.port}{path}",
        data=data,
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(req, timeout=10) as r:
            return r.status, json.loads(r.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


def test_session_endpoint_initial_state(server):
    status, body = get(server, "/api/session")
    assert status == 200
    assert body["status"] == "awaiting_iteration"
    assert body["iteration"] == 0
    assert body["query"] == ["quartz"]
    assert body["seed_query"] == ["quartz"]
    assert body["schema_version"] == 1
    assert body["params"] == {"alpha": 1.0, "top_docs": 2, "top_terms": 3}
    assert len(body["index_fingerprint"]) == 64
    assert body["zero_signal"] is False


def test_iterate_then_read_ranking_and_candidates(server):
    status, body = post(server, "/api/session/iterate")
    assert status == 200
    assert body["status"] == "awaiting_decisions"
    assert body["iteration"] == 1
    assert [d["document"] for d in body["ranking"]] == ["t1", "t2"]
    assert all("total_words" in d and "score" in d for d in body["ranking"])
    assert {c["term"] for c in body["candidates"]} == {"agate", "jasper"}

    status, ranking = get(server, "/api/session/ranking")
    assert status == 200
    assert ranking["iteration"] == 1
    assert ranking["ranking"] == body["ranking"]

    status, cands = get(server, "/api/session/candidates")
    assert status == 200
    assert cands["decided"] is False
    assert cands["candidates"] == body["candidates"]


def test_candidate_count_is_cutoff_minus_query_overlap():
    # the top-terms cutoff includes query members, which are then excluded:
    # |candidates| == top_terms - |top-terms ∩ query|
    srv = serve_session(topic_session(top_terms=4))
    try:
        _, body = post(srv, "/api/session/iterate")
        top_terms = 4
        query = get(srv, "/api/session")[1]["query"]
        # the corpus has 5 terms; the top four contain the single query term
        assert len(body["candidates"]) == top_terms - 1
        assert not ({c["term"] for c in body["candidates"]} & set(query))
    finally:
        srv.shutdown()


def test_decisions_happy_path_to_convergence(server):
    post(server, "/api/session/iterate")
    _, cands = get(server, "/api/session/candidates")
    decisions = {c["term"]: "accept" for c in cands["candidates"]}
    status, body = post(
        server, "/api/session/decisions", {"decisions": decisions, "decided_by": "web"}
    )
    assert status == 200
    assert body["status"] == "awaiting_iteration"
    assert set(body["query"]) == {"quartz", "agate", "jasper"}

    status, body = post(server, "/api/session/iterate")
    assert status == 200
    assert body["status"] == "converged"
    assert server.converged.is_set()
    assert server.wait_converged(timeout=0.1) is True

    _, hist = get(server, "/api/session/history")
    assert len(hist["history"]) == 2
    assert hist["history"][0]["decided_by"] == "web"
    assert hist["history"][0]["decisions"]["agate"] == "accepted"


def test_incomplete_decisions_rejected_400(server):
    post(server, "/api/session/iterate")
    _, cands = get(server, "/api/session/candidates")
    one_term = cands["candidates"][0]["term"]
    status, body = post(server, "/api/session/decisions", {"decisions": {one_term: "accept"}})
    assert status == 400
    assert "undecided candidates" in body["error"]
    # the submission changed nothing
    _, session = get(server, "/api/session")
    assert session["status"] == "awaiting_decisions"
    assert session["query"] == ["quartz"]


def test_extra_and_malformed_decisions_400(server):
    post(server, "/api/session/iterate")
    _, cands = get(server, "/api/session/candidates")
    decisions = {c["term"]: "accept" for c in cands["candidates"]}
    status, body = post(
        server, "/api/session/decisions", {"decisions": decisions | {"mud": "accept"}}
    )
    assert status == 400
    assert "non-candidate terms" in body["error"]
    status, body = post(server, "/api/session/decisions", {"wrong_key": 1})
    assert status == 400
    assert "decisions" in body["error"]
    status, body = post(server, "/api/session/decisions", {"decisions": "not a map"})
    assert status == 400


def test_decisions_in_wrong_state_409(server):
    status, body = post(server, "/api/session/decisions", {"decisions": {}})
    assert status == 409
    assert "awaiting_iteration" in body["error"]


def test_iterate_in_wrong_state_409(server):
    post(server, "/api/session/iterate")
    status, body = post(server, "/api/session/iterate")
    assert status == 409
    assert "awaiting_decisions" in body["error"]


def test_keep_alive_connection_survives_posts_with_bodies(server):
    # one TCP connection for the whole exchange: any unread request body
    # would desynchronize the stream and garble the next request line
    import http.client

    conn = http.client.HTTPConnection("127.0.0.1", server.port, timeout=10)
    try:
        headers = {"Content-Type": "application/json"}
        conn.request("POST", "/api/session/iterate", body=b"{}", headers=headers)
        first = conn.getresponse()
        assert first.status == 200
        json.loads(first.read())

        conn.request("GET", "/api/session")
        second = conn.getresponse()
        assert second.status == 200
        assert json.loads(second.read())["status"] == "awaiting_decisions"

        conn.request("POST", "/api/nope", body=b'{"x": 1}', headers=headers)
        third = conn.getresponse()
        assert third.status == 404
        json.loads(third.read())

        conn.request("GET", "/api/session/candidates")
        fourth = conn.getresponse()
        assert fourth.status == 200
        json.loads(fourth.read())
    finally:
        conn.close()


def test_unknown_endpoints_404(server):
    status, body = get(server, "/api/nope")
    assert status == 404
    assert "no such endpoint" in body["error"]
    status, body = post(server, "/api/nope")
    assert status == 404


def test_fallback_page_without_ui_dir(server):
    url = f"http://127.0.0.1:{server.port}/"
    with urllib.request.urlopen(url, timeout=10) as r:
        assert r.status == 200
        assert "text/html" in r.headers["Content-Type"]
        page = r.read().decode()
    assert "/api/session" in page
    status, _ = get(server, "/anything-else.js")
    assert status == 404


def test_static_serving_and_traversal_guard(tmp_path):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<html>panel</html>")
    (ui / "app.js").write_text("console.log('hi')")
    secret = tmp_path / "secret.txt"
    secret.write_text("do not serve")
    srv = serve_session(topic_session(), ui_dir=ui)
    try:
        base = f"http://127.0.0.1:{srv.port}"
        with urllib.request.urlopen(base + "/", timeout=10) as r:
            assert r.read().decode() == "<html>panel</html>"
        with urllib.request.urlopen(base + "/app.js", timeout=10) as r:
            assert "javascript" in r.headers["Content-Type"]
        for sneaky in ("/../secret.txt", "/%2e%2e/secret.txt", "/a/../../secret.txt"):
            with pytest.raises(urllib.error.HTTPError) as exc_info:
                urllib.request.urlopen(base + sneaky, timeout=10)
            assert exc_info.value.code == 404
        # the API still answers with a UI directory configured
        with urllib.request.urlopen(base + "/api/session", timeout=10) as r:
            assert r.status == 200
    finally:
        srv.shutdown()


def test_server_on_converged_session_sets_event():
    session = topic_session()
    from redcohort.session import reject_all_policy, run_to_convergence

    run_to_convergence(session, reject_all_policy)
    srv = SessionServer(session)
    try:
        assert srv.converged.is_set()
        srv.start()
        _, body = get(srv, "/api/session")
        assert body["status"] == "converged"
    finally:
        srv.shutdown()


def test_snapshot_reads_are_consistent_during_mutation(server):
    # grab the pre-iteration snapshot, run a slow mutation on another thread,
    # and confirm reads served meanwhile still see a complete old snapshot
    import threading
    import time

    before = get(server, "/api/session")[1]
    release = threading.Event()

    def slow(sess):
        release.wait(timeout=5)
        return sess.run_iteration()

    worker = threading.Thread(target=lambda: server.mutate(slow))
    worker.start()
    try:
        time.sleep(0.05)
        during = get(server, "/api/session")[1]
        assert during == before  # old snapshot, never a half-written one
    finally:
        release.set()
        worker.join(timeout=5)
    after = get(server, "/api/session")[1]
    assert after["iteration"] == 1
