"""Human-in-the-loop query-expansion sessions over a fixed corpus index.

One iteration: rank documents for the current query, take the top-n as the
relevant set, score the vocabulary against that set, and offer the best new
terms as candidates. Every candidate must then be explicitly accepted or
rejected — no partial submissions — before the next iteration may run. The
session converges when a full round changes neither the query nor the
relevant set; a round with no candidates and an unchanged relevant set
converges immediately, with no decisions owed.

Sessions are bound to the index they were created on via its fingerprint;
loading a session against a different index refuses rather than silently
re-scoring against different counts.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .index import CorpusIndex
from .ranking import (
    DocScore,
    Query,
    RankingParams,
    TermScore,
    rank_documents,
    rank_terms,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

AWAITING_ITERATION = "awaiting_iteration"
AWAITING_DECISIONS = "awaiting_decisions"
CONVERGED = "converged"

ACCEPTED = "accepted"
REJECTED = "rejected"

_DECISION_ALIASES = {
    "accept": ACCEPTED,
    "accepted": ACCEPTED,
    "reject": REJECTED,
    "rejected": REJECTED,
}


class SessionStateError(RuntimeError):
    """An operation was attempted in a status that forbids it."""


class DecisionError(ValueError):
    """A decision map that is incomplete, overreaching, or malformed."""


class IndexMismatchError(ValueError):
    """A saved session was opened against a different corpus index."""


@dataclass
class IterationRecord:
    """Audit snapshot of one iteration: what was shown, what was decided."""

    iteration: int
    ranking: list  # top-n DocScore
    candidates: list  # TermScore offered for decision (may be empty)
    zero_signal: bool
    timestamp: str
    decisions: dict | None = None  # term -> "accepted"/"rejected", once submitted
    decided_by: str | None = None


class ExpansionSession:
    def __init__(
        self,
        index: CorpusIndex,
        seed_terms: Iterable[str],
        params: RankingParams | None = None,
        session_id: str | None = None,
    ):
        self.index = index
        self.params = params or RankingParams()
        seeds: list[str] = []
        for term in seed_terms:
            if term not in seeds:  # duplicates collapse, order kept
                seeds.append(term)
        if not seeds:
            raise ValueError("seed query must not be empty")
        index.vocabulary.resolve(seeds)  # raises listing unknown terms
        self.seed_query: list[str] = seeds
        self.query: list[str] = list(seeds)
        self.previous_query: list[str] | None = None
        self.relevant: list[str] = []
        self.previous_relevant: list[str] | None = None
        self.status = AWAITING_ITERATION
        self.history: list[IterationRecord] = []
        self.index_fingerprint = index.fingerprint()
        self.created_at = _now()
        self.session_id = session_id or self._derive_id()

    def _derive_id(self) -> str:
        key = "|".join(
            [
                self.index_fingerprint,
                ",".join(self.seed_query),
                repr(self.params.alpha),
                str(self.params.top_docs),
                str(self.params.top_terms),
            ]
        )
        return hashlib.sha256(key.encode("utf-8")).hexdigest()[:12]

    @property
    def iteration(self) -> int:
        return len(self.history)

    def run_iteration(self) -> IterationRecord:
        """Rank documents and terms, record the snapshot, set the next status.

        Only legal while awaiting an iteration. If the candidate list comes
        out empty and the relevant set did not move, the session converges on
        the spot (there is nothing to decide).
        """
        if self.status != AWAITING_ITERATION:
            raise SessionStateError(
                f"cannot iterate while status is {self.status!r}"
            )
        query = Query(self.index.vocabulary.resolve(self.query))
        ranked = rank_documents(self.index, query, self.params)
        top = ranked[: self.params.top_docs]
        zero_signal = bool(top) and all(d.score == 0.0 for d in top)
        if zero_signal:
            log.warning(
                "session %s: no query term appears in any document; "
                "ranking carries no signal",
                self.session_id,
            )
        old_relevant = self.relevant
        self.previous_relevant = old_relevant
        self.relevant = [d.document for d in top]
        if top:
            term_ranking = rank_terms(self.index, self.relevant, self.params)
            in_query = set(self.query)
            candidates = [
                t
                for t in term_ranking[: self.params.top_terms]
                if t.term not in in_query
            ]
        else:
            candidates = []
        record = IterationRecord(
            iteration=len(self.history) + 1,
            ranking=top,
            candidates=candidates,
            zero_signal=zero_signal,
            timestamp=_now(),
        )
        self.history.append(record)
        if not candidates and set(self.relevant) == set(old_relevant):
            self.status = CONVERGED
        else:
            self.status = AWAITING_DECISIONS
        return record

    def submit_decisions(
        self, decisions: Mapping[str, str], decided_by: str | None = None
    ) -> IterationRecord:
        """Apply a complete accept/reject map for the pending candidates.

        The map's keys must be exactly the candidate terms — a missing or
        extra key rejects the whole submission and changes nothing. Accepted
        terms are appended to the query in candidate order. If nothing was
        accepted and the relevant set did not move this round, the session
        converges; otherwise it awaits the next iteration.
        """
        if self.status != AWAITING_DECISIONS:
            raise SessionStateError(
                f"cannot submit decisions while status is {self.status!r}"
            )
        record = self.history[-1]
        candidate_terms = [t.term for t in record.candidates]
        candidate_set = set(candidate_terms)
        extra = sorted(set(decisions) - candidate_set)
        if extra:
            raise DecisionError(f"decisions for non-candidate terms: {', '.join(extra)}")
        missing = sorted(candidate_set - set(decisions))
        if missing:
            raise DecisionError(f"undecided candidates: {', '.join(missing)}")
        normalized: dict[str, str] = {}
        for term in candidate_terms:
            verdict = _DECISION_ALIASES.get(str(decisions[term]).strip().lower())
            if verdict is None:
                raise DecisionError(
                    f"bad decision {decisions[term]!r} for term {term!r}"
                )
            normalized[term] = verdict
        accepted = [t for t in candidate_terms if normalized[t] == ACCEPTED]
        record.decisions = normalized
        record.decided_by = decided_by
        self.previous_query = list(self.query)
        self.query = self.query + accepted
        relevant_stable = set(self.relevant) == set(self.previous_relevant or [])
        if not accepted and relevant_stable:
            self.status = CONVERGED
        else:
            self.status = AWAITING_ITERATION
        return record


def create_session(
    index: CorpusIndex,
    seed_terms: Iterable[str],
    params: RankingParams | None = None,
    session_id: str | None = None,
) -> ExpansionSession:
    return ExpansionSession(index, seed_terms, params, session_id)


# -- canned decision policies ---------------------------------------------


def reject_all_policy(candidates: Iterable[TermScore]) -> dict[str, str]:
    return {t.term: REJECTED for t in candidates}


def allowlist_policy(allowed: Iterable[str]) -> Callable[[Iterable[TermScore]], dict]:
    """Accept exactly the candidates on the allowlist, reject the rest."""
    allowed_set = set(allowed)

    def policy(candidates: Iterable[TermScore]) -> dict[str, str]:
        return {
            t.term: ACCEPTED if t.term in allowed_set else REJECTED
            for t in candidates
        }

    return policy


def run_to_convergence(
    session: ExpansionSession,
    policy: Callable[[Iterable[TermScore]], Mapping[str, str]],
    decided_by: str = "policy",
    max_iterations: int | None = None,
) -> ExpansionSession:
    """Drive the loop with an automatic decision policy until convergence.

    The query only ever grows and is bounded by the vocabulary, so a
    deterministic policy always terminates; ``max_iterations`` is a tripwire
    against a policy that is not a function of the candidates.
    """
    if max_iterations is None:
        max_iterations = len(session.index.documents) + len(session.index.vocabulary) + 2
    while session.status != CONVERGED:
        if len(session.history) >= max_iterations:
            raise RuntimeError(
                f"no convergence after {max_iterations} iterations"
            )
        if session.status == AWAITING_ITERATION:
            record = session.run_iteration()
        if session.status == AWAITING_DECISIONS:
            record = session.history[-1]
            session.submit_decisions(policy(record.candidates), decided_by=decided_by)
    return session


# -- persistence ----------------------------------------------------------


def session_to_dict(session: ExpansionSession) -> dict:
    """Full JSON-ready state, including the audit history.

    Ranking rows carry each document's retained word count so a reviewer can
    read the file without the index at hand.
    """
    index = session.index
    return {
        "schema_version": SCHEMA_VERSION,
        "session_id": session.session_id,
        "index_fingerprint": session.index_fingerprint,
        "created_at": session.created_at,
        "params": {
            "alpha": session.params.alpha,
            "top_docs": session.params.top_docs,
            "top_terms": session.params.top_terms,
        },
        "status": session.status,
        "seed_query": list(session.seed_query),
        "query": list(session.query),
        "previous_query": list(session.previous_query)
        if session.previous_query is not None
        else None,
        "relevant": list(session.relevant),
        "previous_relevant": list(session.previous_relevant)
        if session.previous_relevant is not None
        else None,
        "history": [
            {
                "iteration": rec.iteration,
                "timestamp": rec.timestamp,
                "zero_signal": rec.zero_signal,
                "ranking": [
                    {
                        "document": d.document,
                        "score": d.score,
                        "total_words": index.document(d.document).total_words,
                    }
                    for d in rec.ranking
                ],
                "candidates": [
                    {"term": t.term, "score": t.score} for t in rec.candidates
                ],
                "decisions": dict(rec.decisions) if rec.decisions is not None else None,
                "decided_by": rec.decided_by,
            }
            for rec in session.history
        ],
    }


def save_session(session: ExpansionSession, path: str | Path) -> None:
    doc = session_to_dict(session)
    Path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_session(path: str | Path, index: CorpusIndex) -> ExpansionSession:
    """Rebuild a saved session, refusing if the index fingerprint differs."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported session schema {data.get('schema_version')!r}"
        )
    fingerprint = index.fingerprint()
    if data["index_fingerprint"] != fingerprint:
        raise IndexMismatchError(
            "session was created on a different index "
            f"({data['index_fingerprint'][:12]}… vs {fingerprint[:12]}…)"
        )
    params = RankingParams(
        alpha=data["params"]["alpha"],
        top_docs=data["params"]["top_docs"],
        top_terms=data["params"]["top_terms"],
    )
    session = ExpansionSession(
        index, data["seed_query"], params, session_id=data["session_id"]
    )
    session.created_at = data["created_at"]
    session.query = list(data["query"])
    session.previous_query = (
        list(data["previous_query"]) if data["previous_query"] is not None else None
    )
    session.relevant = list(data["relevant"])
    session.previous_relevant = (
        list(data["previous_relevant"])
        if data["previous_relevant"] is not None
        else None
    )
    session.status = data["status"]
    if session.status not in (AWAITING_ITERATION, AWAITING_DECISIONS, CONVERGED):
        raise ValueError(f"unknown session status {session.status!r}")
    session.history = [
        IterationRecord(
            iteration=rec["iteration"],
            ranking=[DocScore(r["document"], r["score"]) for r in rec["ranking"]],
            candidates=[TermScore(c["term"], c["score"]) for c in rec["candidates"]],
            zero_signal=rec["zero_signal"],
            timestamp=rec["timestamp"],
            decisions=dict(rec["decisions"]) if rec["decisions"] is not None else None,
            decided_by=rec["decided_by"],
        )
        for rec in data["history"]
    ]
    return session


def replay_decisions(index: CorpusIndex, saved: dict) -> ExpansionSession:
    """Re-run a finished session's decision log against the same index.

    Deterministic ranking makes the replay land on the same query, relevant
    set, and status; used for audits and as a consistency check on save
    files.
    """
    params = RankingParams(
        alpha=saved["params"]["alpha"],
        top_docs=saved["params"]["top_docs"],
        top_terms=saved["params"]["top_terms"],
    )
    session = ExpansionSession(
        index, saved["seed_query"], params, session_id=saved["session_id"]
    )
    for rec in saved["history"]:
        session.run_iteration()
        if rec["decisions"] is not None:
            session.submit_decisions(rec["decisions"], decided_by=rec["decided_by"])
    return session


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")
