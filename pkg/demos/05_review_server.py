"""Serve an expansion session over HTTP for interactive review.

Starts the single-session JSON API on the planted-topic corpus and prints
a curl cheat sheet. A reviewer (or the bundled web panel, see the
frontend/ directory) inspects the ranking, decides on each candidate
term, and triggers the next iteration until the session converges.

    python3 demos/05_review_server.py          # serve until converged / Ctrl-C
    python3 demos/05_review_server.py --auto   # a scripted reviewer drives it

The equivalent command-line entry point is:

    redcohort expand --index CACHE --seed quartz ... --serve 0
"""

import json
import sys
import threading
import urllib.request

from redcohort.api import SessionServer
from redcohort.index import build_corpus_index
from redcohort.ranking import RankingParams
from redcohort.session import create_session
from redcohort.synth import planted_topic_corpus


def _entries(rows):
    from redcohort.entries import Entry

    for row in rows:
        yield Entry(row["id"], row["author"], row["subreddit"],
                    row["created_utc"], row["body"], "comment")


def _drive(port: int, accept: set) -> None:
    """Play the reviewer over HTTP: accept the allowlist, reject the rest."""

    def get(path):
        with urllib.request.urlopen(f"http://127.0.0.1:{port}{path}") as r:
            return json.loads(r.read())

    def post(path, payload):
        req = urllib.request.Request(
            f"http://127.0.0.1:{port}{path}",
            data=json.dumps(payload).encode(),
            headers={"Content-Type": "application/json"}, method="POST",
        )
        with urllib.request.urlopen(req) as r:
            return json.loads(r.read())

    while True:
        status = get("/api/session")["status"]
        if status == "converged":
            return
        if status == "awaiting_iteration":
            post("/api/session/iterate", {})
            continue
        candidates = get("/api/session/candidates")["candidates"]
        decisions = {
            c["term"]: "accepted" if c["term"] in accept else "rejected"
            for c in candidates
        }
        print(f"scripted reviewer: accepting "
              f"{sorted(set(decisions) & accept) or 'nothing'} this round")
        post("/api/session/decisions",
             {"decisions": decisions, "decided_by": "demo-script"})


def main() -> None:
    fixture = planted_topic_corpus()
    index = build_corpus_index(_entries(fixture["rows"]))
    session = create_session(
        index, fixture["seed_terms"],
        RankingParams(alpha=10_000.0, top_docs=3, top_terms=12),
    )
    session.run_iteration()  # so the first GET already has a ranking

    server = SessionServer(session)
    server.start()
    base = f"http://127.0.0.1:{server.port}"
    print(f"serving review session at {base}/")
    print("try:")
    print(f"  curl {base}/api/session")
    print(f"  curl {base}/api/session/ranking")
    print(f"  curl {base}/api/session/candidates")
    print(f"  curl -X POST {base}/api/session/decisions \\")
    print("       -d '{\"decisions\": {\"karstle\": \"accepted\", ...}}'")
    print(f"  curl -X POST {base}/api/session/iterate -d '{{}}'")

    if "--auto" in sys.argv[1:]:
        worker = threading.Thread(
            target=_drive, args=(server.port, set(fixture["planted_terms"])),
            daemon=True,
        )
        worker.start()

    try:
        server.converged.wait()
        print(f"converged after {session.iteration} iterations; "
              f"final query: {session.query}")
    except KeyboardInterrupt:
        print("stopping")
    finally:
        server.shutdown()


if __name__ == "__main__":
    main()
