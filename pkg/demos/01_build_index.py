"""Build a corpus index from a raw NDJSON dump and poke at what it holds.

Walks through the first pipeline stage: parse dump lines into entries,
tally per-community word counts, apply the activity and frequency
thresholds, and write the binary cache that every later stage loads.
Run from the repository root:

    python3 demos/01_build_index.py
"""

import tempfile
from pathlib import Path

from redcohort.index import CorpusIndex, build_corpus_index
from redcohort.entries import iter_entries, IngestSummary
from redcohort.synth import random_dump, write_ndjson


def main() -> None:
    work = Path(tempfile.mkdtemp(prefix="redcohort-demo01-"))
    dump = work / "dump.ndjson"
    write_ndjson(dump, random_dump(5_000))
    print(f"wrote a 5,000-line synthetic dump to {dump}")

    # Thresholds: a community needs >= 50 entries to count as a document,
    # and a word needs >= 50 occurrences across surviving documents to stay
    # in the vocabulary. Documents are filtered first, then terms.
    summary = IngestSummary()
    index = build_corpus_index(
        iter_entries([dump], summary=summary), min_doc_entries=50, min_term_count=50
    )
    print(f"parsed {summary.indexed} of {summary.lines} lines "
          f"({summary.skipped} skipped: sentinel authors, bad rows)")
    print(f"index: {len(index.documents)} documents, "
          f"{len(index.vocabulary)} vocabulary terms")

    busiest = max(index.documents.values(), key=lambda d: d.total_words)
    print(f"busiest community: {busiest.doc_id} "
          f"({busiest.entry_count} entries, {busiest.total_words} words, "
          f"{len(busiest.authors)} distinct authors)")

    common = max(
        range(len(index.vocabulary)), key=index.vocabulary.corpus_prob
    )
    print(f"most common term: {index.vocabulary.term_of(common)!r} "
          f"with corpus probability {index.vocabulary.corpus_prob(common):.4f}")

    # The cache is canonical: building twice from the same dump gives the
    # same bytes, so the fingerprint can stand in for the whole corpus.
    cache = work / "corpus.idx"
    index.save(cache)
    again = CorpusIndex.load(cache)
    assert again.fingerprint() == index.fingerprint()
    print(f"cache written to {cache}")
    print(f"fingerprint: {index.fingerprint()}")


if __name__ == "__main__":
    main()
