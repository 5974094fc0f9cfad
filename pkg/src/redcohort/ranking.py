"""Query-conditioned document ranking and term scoring over a corpus index.

Document side: each document gets a regularized unigram model — in-document
frequency damped by a large additive constant in the denominator, plus the
corpus-wide probability as a floor — and is scored by the query-term portion
of the divergence between that model and the corpus distribution. Terms the
document never uses contribute exactly zero, so untouched documents score 0.

Term side: against a set of relevant documents, a term is scored by the summed
log-ratio of its regularized in-document frequency (no corpus floor here)
against its corpus probability. A term absent from every relevant document
scores exactly 0; a single occurrence makes it strictly positive.

Natural log throughout; orderings are invariant to the log base.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .index import CorpusIndex


@dataclass(frozen=True)
class RankingParams:
    """Smoothing constant and cutoff sizes for one ranking configuration."""

    alpha: float = 10_000.0
    top_docs: int = 10
    top_terms: int = 20

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.top_docs < 1:
            raise ValueError("top_docs must be >= 1")
        if self.top_terms < 1:
            raise ValueError("top_terms must be >= 1")


@dataclass(frozen=True)
class DocScore:
    document: str
    score: float


@dataclass(frozen=True)
class TermScore:
    term: str
    score: float


@dataclass(frozen=True)
class Query:
    """Ordered, duplicate-free tuple of vocabulary term ids."""

    term_ids: tuple

    def __init__(self, term_ids: Iterable[int]):
        ids = tuple(int(t) for t in term_ids)
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate terms in query")
        object.__setattr__(self, "term_ids", ids)

    def __len__(self) -> int:
        return len(self.term_ids)

    @classmethod
    def from_terms(cls, index: CorpusIndex, terms: Iterable[str]) -> "Query":
        """Resolve term strings against the index vocabulary.

        Unknown terms raise with every offender listed; duplicates raise.
        """
        return cls(index.vocabulary.resolve(terms))


def doc_prob(
    index: CorpusIndex, doc_id: str, term_id: int, params: RankingParams
) -> float:
    """Regularized probability of ``term_id`` under the document's model.

    count / (total_words + alpha) plus the corpus probability. For a term the
    document never uses this equals the corpus probability exactly. A
    zero-word document with alpha == 0 has no frequency part at all.
    """
    doc = index.document(doc_id)
    p_corpus = index.vocabulary.corpus_prob(term_id)
    denom = doc.total_words + params.alpha
    if denom <= 0:
        return p_corpus
    return doc.term_counts.get(term_id, 0) / denom + p_corpus


def doc_score(
    index: CorpusIndex, doc_id: str, query: Query, params: RankingParams
) -> float:
    """Sum over query terms of p_doc * log(p_doc / p_corpus).

    Non-negative, and exactly 0 when the document contains none of the query
    terms. Raises on an empty query or an id outside the vocabulary.
    """
    if not query.term_ids:
        raise ValueError("query must not be empty")
    total = 0.0
    for term_id in query.term_ids:
        p_c = index.vocabulary.corpus_prob(term_id)
        p_d = doc_prob(index, doc_id, term_id, params)
        if p_d != p_c:
            total += p_d * math.log(p_d / p_c)
        # equal probabilities contribute log(1) == 0 exactly
    return total


def rank_documents(
    index: CorpusIndex, query: Query, params: RankingParams
) -> list[DocScore]:
    """Score every document for ``query``; descending score, ties by doc id."""
    if not query.term_ids:
        raise ValueError("query must not be empty")
    vocab = index.vocabulary
    priors = [vocab.corpus_prob(t) for t in query.term_ids]
    scored = []
    for doc_id, doc in index.documents.items():
        denom = doc.total_words + params.alpha
        total = 0.0
        for term_id, p_c in zip(query.term_ids, priors):
            count = doc.term_counts.get(term_id, 0)
            if count and denom > 0:
                p_d = count / denom + p_c
                total += p_d * math.log(p_d / p_c)
        scored.append(DocScore(doc_id, total))
    scored.sort(key=lambda d: (-d.score, d.document))
    return scored


def term_score(
    index: CorpusIndex,
    term_id: int,
    doc_ids: Iterable[str],
    params: RankingParams,
) -> float:
    """Summed log-ratio of the term's damped in-document frequency vs. prior.

    Zero iff the term appears in none of ``doc_ids``. The in-document
    frequency here has no corpus floor; the prior enters only as the ratio's
    baseline, so absence contributes log(1) == 0 exactly.
    """
    doc_ids = list(doc_ids)
    if not doc_ids:
        raise ValueError("relevant document set must not be empty")
    p_c = index.vocabulary.corpus_prob(term_id)
    total = 0.0
    for doc_id in doc_ids:
        doc = index.document(doc_id)
        denom = doc.total_words + params.alpha
        count = doc.term_counts.get(term_id, 0)
        p_hat = count / denom if denom > 0 else 0.0
        total += math.log((p_hat + p_c) / p_c)
    return total


def rank_terms(
    index: CorpusIndex, doc_ids: Iterable[str], params: RankingParams
) -> list[TermScore]:
    """Score the whole vocabulary against the relevant set.

    Descending score; ties broken by term string ascending. Terms absent from
    every relevant document keep score exactly 0.0.
    """
    doc_ids = list(doc_ids)
    if not doc_ids:
        raise ValueError("relevant document set must not be empty")
    vocab = index.vocabulary
    acc: dict[int, float] = {}
    for doc_id in doc_ids:
        doc = index.document(doc_id)
        denom = doc.total_words + params.alpha
        if denom <= 0:
            continue  # zero-word document contributes log(1) for every term
        for term_id, count in doc.term_counts.items():
            p_c = vocab.corpus_prob(term_id)
            p_hat = count / denom
            acc[term_id] = acc.get(term_id, 0.0) + math.log((p_hat + p_c) / p_c)
    scored = [
        TermScore(vocab.term_of(term_id), acc.get(term_id, 0.0))
        for term_id in range(len(vocab))
    ]
    scored.sort(key=lambda t: (-t.score, t.term))
    return scored


def export_topic_vocabulary(
    ranked: Sequence[TermScore], threshold: float = 1.0
) -> list[tuple[str, float]]:
    """Rows (term, score) with score strictly above ``threshold``, rank order."""
    return [(t.term, t.score) for t in ranked if t.score > threshold]


def write_ranking_csv(
    path: str | Path, scored: Sequence[DocScore], index: CorpusIndex
) -> None:
    """document,score,total_words — UTF-8, comma, header, LF line endings."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["document", "score", "total_words"])
        for row in scored:
            writer.writerow(
                [row.document, repr(row.score), index.document(row.document).total_words]
            )


def write_term_scores_csv(
    path: str | Path, rows: Iterable[tuple[str, float]]
) -> None:
    """term,score — UTF-8, comma, header, LF line endings."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["term", "score"])
        for term, score in rows:
            writer.writerow([term, repr(score)])
