"""Synthetic NDJSON corpora for demos and end-to-end fixtures.

Two generators: a planted-topic corpus where a known trio of communities
talks about a known five-term jargon (so retrieval and expansion have an
exact expected answer), and a larger mixed dump that exercises thresholds,
sentinel authors, and both entry kinds. Both are deterministic for a given
seed.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Iterable

SEED_TERMS = ("quartz", "feldspar", "basalt", "gneiss")

PLANTED_TERMS = ("karstle", "lithmarl", "orogenite", "vugstone", "zircupane")

_FILLER = (
    "the a and to of in on for with about really just like today work home "
    "game team coffee morning night week year good bad new old big small "
    "watch read walk run talk think time people thing place"
).split()

_PLANTED_DOCS = ("mineralforum1", "mineralforum2", "mineralforum3")


def planted_topic_corpus(
    n_background: int = 50,
    entries_per_doc: int = 100,
    seed: int = 20160101,
) -> dict:
    """Rows plus ground truth for the planted-topic scenario.

    Background communities never use the seed or planted terms, so their
    documents score exactly zero for the seed query; the three planted
    communities use all of them in every entry, so they are the full answer
    set and the planted terms dominate the candidate ranking.

    With the default sizes every document clears a 100-entry threshold and
    every seed/planted term clears a 100-occurrence threshold.
    """
    rng = random.Random(seed)
    rows = []
    base_ts = 1_451_606_400  # 2016-01-01T00:00:00Z
    serial = 0

    background_docs = [f"chatter{i:02d}" for i in range(1, n_background + 1)]
    for doc in background_docs:
        for _ in range(entries_per_doc):
            serial += 1
            rows.append(
                {
                    "id": f"b{serial}",
                    "author": f"user{rng.randrange(400):03d}",
                    "subreddit": doc,
                    "created_utc": base_ts + serial,
                    "body": " ".join(rng.choices(_FILLER, k=20)),
                }
            )

    for doc_pos, doc in enumerate(_PLANTED_DOCS):
        for k in range(entries_per_doc):
            serial += 1
            words = list(rng.choices(_FILLER, k=6))
            words += list(SEED_TERMS)
            words += list(PLANTED_TERMS)
            # deterministic extra repeats so raw counts differ across the
            # planted terms (earlier ones end up more frequent)
            words += PLANTED_TERMS[: k % (len(PLANTED_TERMS) + 1)]
            rng.shuffle(words)
            rows.append(
                {
                    "id": f"p{serial}",
                    "author": f"rockfan{doc_pos}{k % 25:02d}",
                    "subreddit": doc,
                    "created_utc": base_ts + serial,
                    "body": " ".join(words),
                }
            )

    return {
        "rows": rows,
        "seed_terms": list(SEED_TERMS),
        "planted_terms": list(PLANTED_TERMS),
        "planted_docs": list(_PLANTED_DOCS),
        "background_docs": background_docs,
        "seed": seed,
    }


def random_dump(n_lines: int = 10_000, seed: int = 42) -> list:
    """A mixed, messy-but-valid dump for threshold and determinism checks.

    Community sizes and word frequencies are heavily skewed so that, at the
    default thresholds, some communities and terms survive and others do
    not. Includes submissions as well as comments, occasional flairs, and a
    sprinkle of sentinel authors.
    """
    rng = random.Random(seed)
    subreddits = [f"board{i:02d}" for i in range(30)]
    sub_weights = [1.0 / (i + 1) for i in range(len(subreddits))]
    vocab = [f"word{i:03d}" for i in range(150)]
    vocab_weights = [1.0 / (i + 1) ** 1.1 for i in range(len(vocab))]
    authors = [f"redditor{i:03d}" for i in range(200)]
    base_ts = 1_451_606_400
    year = 365 * 24 * 3600

    rows = []
    for i in range(n_lines):
        author = "[deleted]" if rng.random() < 0.02 else rng.choice(authors)
        sub = rng.choices(subreddits, weights=sub_weights, k=1)[0]
        text = " ".join(rng.choices(vocab, weights=vocab_weights, k=12))
        row = {
            "id": f"m{i}",
            "author": author,
            "subreddit": sub,
            "created_utc": base_ts + rng.randrange(year),
        }
        if rng.random() < 0.1:
            row["title"] = text
            row["selftext"] = " ".join(
                rng.choices(vocab, weights=vocab_weights, k=8)
            )
        else:
            row["body"] = text
        if rng.random() < 0.05:
            row["author_flair_text"] = rng.choice(["sunny", "rainy", "stormy"])
        rows.append(row)
    return rows


def write_ndjson(path: str | Path, rows: Iterable[dict]) -> None:
    """One JSON object per line, sorted keys, LF endings; deterministic."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
