"""Rank communities for a seed query, then grow the query iteratively.

Uses the planted-topic corpus: three communities share a five-term jargon
that the rest of the corpus never uses, so there is an exact right answer.
The expansion session offers candidate terms round by round; here a
scripted allowlist plays the reviewer. Run from the repository root:

    python3 demos/02_rank_and_expand.py
"""

from redcohort.index import build_corpus_index
from redcohort.entries import Entry
from redcohort.ranking import Query, RankingParams, rank_documents, rank_terms
from redcohort.session import allowlist_policy, create_session, run_to_convergence
from redcohort.synth import planted_topic_corpus


def entries_from_rows(rows):
    for row in rows:
        yield Entry(
            row["id"], row["author"], row["subreddit"],
            row["created_utc"], row["body"], "comment",
        )


def main() -> None:
    fixture = planted_topic_corpus()
    index = build_corpus_index(entries_from_rows(fixture["rows"]))
    print(f"corpus: {len(index.documents)} communities, "
          f"{len(index.vocabulary)} vocabulary terms")
    print(f"planted answer: docs {fixture['planted_docs']} "
          f"/ terms {fixture['planted_terms']}")

    params = RankingParams(alpha=10_000.0, top_docs=3, top_terms=12)
    seeds = fixture["seed_terms"]
    print(f"\nseed query: {seeds}")

    # One-shot ranking: only the planted communities score above zero,
    # because nobody else ever uses a seed term.
    ranked = rank_documents(index, Query.from_terms(index, seeds), params)
    print("\ntop communities for the seed query:")
    for row in ranked[:5]:
        print(f"  {row.document:16s} {row.score:.6f}")

    # Candidate terms against the top-3 relevant set. The jargon terms
    # surface immediately; common filler scores near zero.
    candidates = rank_terms(index, [d.document for d in ranked[:3]], params)
    print("\ntop candidate terms against the relevant set:")
    for row in candidates[:10]:
        print(f"  {row.term:12s} {row.score:.6f}")

    # The full loop: iterate, decide, repeat until the query and the
    # relevant set both stop moving. The allowlist accepts exactly the
    # planted jargon and rejects everything else.
    session = create_session(index, seeds, params)
    run_to_convergence(session, allowlist_policy(set(fixture["planted_terms"])))
    print(f"\nsession converged after {session.iteration} iterations")
    print(f"final query: {session.query}")
    print(f"final relevant set: {sorted(session.relevant)}")

    print("\naudit trail:")
    for record in session.history:
        accepted = [t for t, v in (record.decisions or {}).items() if v == "accepted"]
        print(f"  iteration {record.iteration}: "
              f"{len(record.candidates)} candidates offered, "
              f"accepted {accepted or 'none'}")


if __name__ == "__main__":
    main()
