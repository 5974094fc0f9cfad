"""Immutable corpus index: vocabulary, per-document term counts, author incidence.

Counting is split from finalization so shards of the entry stream can be
tallied independently (one :class:`IndexBuilder` per shard) and merged in any
grouping — merge is associative — before thresholds are applied once at the
end. ``finalize`` first drops documents below the entry threshold, then drops
terms whose corpus-wide count over the *surviving* documents is below the term
threshold; that order matters and is part of the contract.

Serialization is a versioned little-endian binary format with all collections
written in sorted order, so equal corpora produce byte-identical cache files
and therefore equal fingerprints.
"""

from __future__ import annotations

import hashlib
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .entries import Entry
from .textnorm import normalize_text

_MAGIC = b"RCIX"
_FORMAT_VERSION = 1


class CorruptIndexError(ValueError):
    """The cache bytes do not decode to a consistent index."""


class Vocabulary:
    """Retained-term table with dense ids, corpus counts, and probabilities.

    Ids are assigned by sorted term order, so two indexes built from the same
    corpus agree on every id.
    """

    __slots__ = ("_terms", "_ids", "_counts", "_total")

    def __init__(self, term_counts: Mapping[str, int]):
        self._terms: list[str] = sorted(term_counts)
        self._ids = {t: i for i, t in enumerate(self._terms)}
        self._counts = [int(term_counts[t]) for t in self._terms]
        if any(c < 0 for c in self._counts):
            raise ValueError("negative term count")
        self._total = sum(self._counts)

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, term: str) -> bool:
        return term in self._ids

    @property
    def terms(self) -> list[str]:
        return list(self._terms)

    @property
    def total(self) -> int:
        """Total corpus occurrences over retained terms."""
        return self._total

    def id_of(self, term: str) -> int:
        try:
            return self._ids[term]
        except KeyError:
            raise KeyError(f"term not in vocabulary: {term!r}") from None

    def term_of(self, term_id: int) -> str:
        if not 0 <= term_id < len(self._terms):
            raise KeyError(f"unknown term id: {term_id}")
        return self._terms[term_id]

    def corpus_count(self, term_id: int) -> int:
        if not 0 <= term_id < len(self._counts):
            raise KeyError(f"unknown term id: {term_id}")
        return self._counts[term_id]

    def corpus_prob(self, term_id: int) -> float:
        """Background probability of the term (count / corpus total)."""
        return self.corpus_count(term_id) / self._total

    def resolve(self, terms: Iterable[str]) -> list[int]:
        """Map term strings to ids; unknown terms raise, all listed at once."""
        terms = list(terms)
        unknown = sorted({t for t in terms if t not in self._ids})
        if unknown:
            raise ValueError(f"terms not in vocabulary: {', '.join(unknown)}")
        return [self._ids[t] for t in terms]


@dataclass(frozen=True)
class DocumentModel:
    """One document's retained-term counts and author set."""

    doc_id: str
    term_counts: Mapping[int, int]  # term id -> in-document count
    total_words: int  # sum of retained counts
    authors: frozenset
    entry_count: int

    def count(self, term_id: int) -> int:
        return self.term_counts.get(term_id, 0)


class CorpusIndex:
    """Finalized, read-only view of a filtered corpus."""

    def __init__(
        self,
        vocabulary: Vocabulary,
        documents: Mapping[str, DocumentModel],
        min_doc_entries: int,
        min_term_count: int,
    ):
        self.vocabulary = vocabulary
        self.documents: dict[str, DocumentModel] = {
            d: documents[d] for d in sorted(documents)
        }
        self.min_doc_entries = int(min_doc_entries)
        self.min_term_count = int(min_term_count)
        author_docs: dict[str, set] = {}
        for doc_id, model in self.documents.items():
            for author in model.authors:
                author_docs.setdefault(author, set()).add(doc_id)
        self.author_docs: dict[str, frozenset] = {
            a: frozenset(ds) for a, ds in author_docs.items()
        }
        self._fingerprint: str | None = None

    @property
    def doc_ids(self) -> list[str]:
        return list(self.documents)

    def document(self, doc_id: str) -> DocumentModel:
        try:
            return self.documents[doc_id]
        except KeyError:
            raise KeyError(f"unknown document: {doc_id!r}") from None

    def author_set(self, doc_ids: Iterable[str]) -> set:
        """Union of author sets over ``doc_ids`` (deduplicated)."""
        authors: set = set()
        for doc_id in doc_ids:
            authors |= self.document(doc_id).authors
        return authors

    # -- serialization ----------------------------------------------------

    def to_bytes(self) -> bytes:
        out = bytearray()
        out += _MAGIC
        out += struct.pack("<B", _FORMAT_VERSION)
        out += struct.pack("<II", self.min_doc_entries, self.min_term_count)
        vocab = self.vocabulary
        out += struct.pack("<I", len(vocab))
        for term_id, term in enumerate(vocab._terms):
            _pack_str(out, term)
            out += struct.pack("<Q", vocab._counts[term_id])
        out += struct.pack("<Q", vocab.total)
        out += struct.pack("<I", len(self.documents))
        for doc_id in sorted(self.documents):
            model = self.documents[doc_id]
            _pack_str(out, doc_id)
            out += struct.pack("<QQ", model.entry_count, model.total_words)
            out += struct.pack("<I", len(model.term_counts))
            for tid in sorted(model.term_counts):
                out += struct.pack("<IQ", tid, model.term_counts[tid])
            authors = sorted(model.authors)
            out += struct.pack("<I", len(authors))
            for author in authors:
                _pack_str(out, author)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "CorpusIndex":
        reader = _Reader(data)
        if reader.take(4) != _MAGIC:
            raise CorruptIndexError("bad magic; not an index cache")
        (version,) = reader.unpack("<B")
        if version != _FORMAT_VERSION:
            raise CorruptIndexError(f"unsupported cache version {version}")
        min_doc_entries, min_term_count = reader.unpack("<II")
        (n_terms,) = reader.unpack("<I")
        term_counts: dict[str, int] = {}
        terms: list[str] = []
        for _ in range(n_terms):
            term = reader.take_str()
            (count,) = reader.unpack("<Q")
            terms.append(term)
            term_counts[term] = count
        (total,) = reader.unpack("<Q")
        if terms != sorted(terms) or len(set(terms)) != len(terms):
            raise CorruptIndexError("vocabulary not sorted/unique")
        if total != sum(term_counts.values()):
            raise CorruptIndexError("corpus total does not match term counts")
        vocab = Vocabulary(term_counts)
        (n_docs,) = reader.unpack("<I")
        documents: dict[str, DocumentModel] = {}
        for _ in range(n_docs):
            doc_id = reader.take_str()
            entry_count, total_words = reader.unpack("<QQ")
            (n_doc_terms,) = reader.unpack("<I")
            counts: dict[int, int] = {}
            for _ in range(n_doc_terms):
                tid, count = reader.unpack("<IQ")
                if not 0 <= tid < n_terms:
                    raise CorruptIndexError(f"term id {tid} out of range")
                counts[tid] = count
            if total_words != sum(counts.values()):
                raise CorruptIndexError(f"word total mismatch in {doc_id!r}")
            (n_authors,) = reader.unpack("<I")
            authors = frozenset(reader.take_str() for _ in range(n_authors))
            if doc_id in documents:
                raise CorruptIndexError(f"duplicate document {doc_id!r}")
            documents[doc_id] = DocumentModel(
                doc_id, counts, total_words, authors, entry_count
            )
        if not reader.done:
            raise CorruptIndexError("trailing bytes after index")
        return cls(vocab, documents, min_doc_entries, min_term_count)

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: str | Path) -> "CorpusIndex":
        return cls.from_bytes(Path(path).read_bytes())

    def fingerprint(self) -> str:
        """sha256 hex digest of the canonical cache bytes (cached)."""
        if self._fingerprint is None:
            self._fingerprint = hashlib.sha256(self.to_bytes()).hexdigest()
        return self._fingerprint


def _pack_str(out: bytearray, s: str) -> None:
    raw = s.encode("utf-8")
    out += struct.pack("<I", len(raw))
    out += raw


class _Reader:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CorruptIndexError("truncated index cache")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def take_str(self) -> str:
        (n,) = self.unpack("<I")
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptIndexError("bad utf-8 in index cache") from exc

    @property
    def done(self) -> bool:
        return self.pos == len(self.data)


class IndexBuilder:
    """Associative counting accumulator for one shard of the entry stream.

    All builders that will be merged must share the same lemma table; merge
    only combines counts and never re-tokenizes.
    """

    def __init__(self, lemma_table: dict[str, str] | None = None):
        self.lemma_table = lemma_table or {}
        self.doc_terms: dict[str, Counter] = {}
        self.doc_entries: Counter = Counter()
        self.doc_authors: dict[str, set] = {}

    def add(self, entry: Entry) -> None:
        tokens = normalize_text(entry.text, self.lemma_table)
        self.doc_terms.setdefault(entry.subreddit, Counter()).update(tokens)
        self.doc_entries[entry.subreddit] += 1
        self.doc_authors.setdefault(entry.subreddit, set()).add(entry.author)

    def merge(self, other: "IndexBuilder") -> "IndexBuilder":
        for doc_id, counter in other.doc_terms.items():
            self.doc_terms.setdefault(doc_id, Counter()).update(counter)
        self.doc_entries.update(other.doc_entries)
        for doc_id, authors in other.doc_authors.items():
            self.doc_authors.setdefault(doc_id, set()).update(authors)
        return self

    def finalize(
        self, min_doc_entries: int = 100, min_term_count: int = 100
    ) -> CorpusIndex:
        """Apply thresholds (documents first, then terms) and freeze.

        A document that clears the entry threshold is kept even if every one
        of its terms is later dropped; it simply has ``total_words == 0``.
        """
        if min_doc_entries < 1 or min_term_count < 1:
            raise ValueError("thresholds must be >= 1")
        kept_docs = sorted(
            d for d, n in self.doc_entries.items() if n >= min_doc_entries
        )
        corpus_counts: Counter = Counter()
        for doc_id in kept_docs:
            corpus_counts.update(self.doc_terms.get(doc_id, ()))
        kept_terms = {
            t: n for t, n in corpus_counts.items() if n >= min_term_count
        }
        vocab = Vocabulary(kept_terms)
        documents: dict[str, DocumentModel] = {}
        for doc_id in kept_docs:
            counts = {
                vocab.id_of(t): n
                for t, n in self.doc_terms.get(doc_id, {}).items()
                if t in kept_terms
            }
            counts = dict(sorted(counts.items()))
            documents[doc_id] = DocumentModel(
                doc_id=doc_id,
                term_counts=counts,
                total_words=sum(counts.values()),
                authors=frozenset(self.doc_authors.get(doc_id, ())),
                entry_count=self.doc_entries[doc_id],
            )
        return CorpusIndex(vocab, documents, min_doc_entries, min_term_count)


def build_corpus_index(
    entries: Iterable[Entry],
    min_doc_entries: int = 100,
    min_term_count: int = 100,
    lemma_table: dict[str, str] | None = None,
) -> CorpusIndex:
    """Single-pass build: count every entry, then threshold and freeze."""
    builder = IndexBuilder(lemma_table)
    for entry in entries:
        builder.add(entry)
    return builder.finalize(min_doc_entries, min_term_count)


def merge_builders(builders: Iterable[IndexBuilder]) -> IndexBuilder:
    """Fold shard builders into one (associative, any grouping)."""
    merged: IndexBuilder | None = None
    for builder in builders:
        if merged is None:
            merged = builder
        else:
            merged.merge(builder)
    if merged is None:
        raise ValueError("no builders to merge")
    return merged
