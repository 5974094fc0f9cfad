import random

import pytest

from redcohort.entries import Entry
from redcohort.index import CorpusIndex, IndexBuilder


def make_index(
    doc_texts,
    min_doc_entries=1,
    min_term_count=1,
    authors=None,
    lemma_table=None,
):
    """Index from {doc_id: [entry text, ...]}; authors optional per doc."""
    builder = IndexBuilder(lemma_table)
    serial = 0
    for doc_id, texts in doc_texts.items():
        doc_authors = (authors or {}).get(doc_id)
        for i, text in enumerate(texts):
            serial += 1
            author = doc_authors[i % len(doc_authors)] if doc_authors else f"a{serial}"
            builder.add(
                Entry(f"e{serial}", author, doc_id, serial, text, "comment")
            )
    return builder.finalize(min_doc_entries, min_term_count)


def random_corpus(rng: random.Random, max_docs=10, max_terms=50):
    """(doc_texts, token_counts) for oracle tests.

    token_counts maps doc -> {term: count}, tallied here independently of
    the index builder so the two routes share nothing but the raw text.
    """
    n_docs = rng.randint(1, max_docs)
    pool = [f"t{i:02d}" for i in range(rng.randint(2, max_terms))]
    doc_texts = {}
    token_counts = {}
    for d in range(n_docs):
        doc_id = f"doc{d:02d}"
        n_entries = rng.randint(1, 3)
        texts = []
        counts = {}
        for _ in range(n_entries):
            words = [rng.choice(pool) for _ in range(rng.randint(0, 40))]
            texts.append(" ".join(words))
            for w in words:
                counts[w] = counts.get(w, 0) + 1
        doc_texts[doc_id] = texts
        token_counts[doc_id] = counts
    # make sure at least one term exists somewhere
    if not any(token_counts.values()):
        doc_texts["doc00"].append(pool[0])
        token_counts["doc00"][pool[0]] = 1
    return doc_texts, token_counts


def scrub_timestamps(obj):
    """Recursively drop timestamp-ish keys for state comparisons."""
    if isinstance(obj, dict):
        return {
            k: scrub_timestamps(v)
            for k, v in obj.items()
            if k not in ("timestamp", "created_at")
        }
    if isinstance(obj, list):
        return [scrub_timestamps(v) for v in obj]
    return obj


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1]
                verdict = "PASS" if status == "passed" else "FAIL"
                lines.append((name, verdict))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"[{verdict}] {name}")
