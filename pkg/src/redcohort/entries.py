"""Parsing and filtering of NDJSON dump entries (submissions and comments)."""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

SUBMISSION = "submission"
COMMENT = "comment"

#: Placeholder author names that mean "account gone"; never real authors.
SENTINEL_AUTHORS = frozenset({"[deleted]", "[removed]"})

_REQUIRED_FIELDS = ("id", "author", "subreddit", "created_utc")


class EntryParseError(ValueError):
    """A line that cannot become an :class:`Entry`.

    ``reason`` is ``"malformed_json"`` or ``"missing_field"`` so callers can
    keep separate tallies.
    """

    def __init__(self, message: str, reason: str):
        super().__init__(message)
        self.reason = reason


@dataclass(frozen=True)
class Entry:
    id: str
    author: str
    subreddit: str
    created_utc: int
    text: str
    kind: str  # SUBMISSION or COMMENT
    flair_text: str | None = None


def parse_entry(line: str) -> Entry:
    """Parse one NDJSON line into an :class:`Entry`.

    A line with a ``body`` field is a comment; otherwise ``title`` (plus
    ``selftext``, joined with a space) makes it a submission. A line with
    neither, or with a required field missing, raises
    :class:`EntryParseError`.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise EntryParseError(f"malformed JSON: {exc}", "malformed_json") from exc
    if not isinstance(obj, dict):
        raise EntryParseError("expected a JSON object", "malformed_json")

    for name in _REQUIRED_FIELDS:
        if obj.get(name) is None:
            raise EntryParseError(f"missing required field {name!r}", "missing_field")
    try:
        created = int(obj["created_utc"])
    except (TypeError, ValueError) as exc:
        raise EntryParseError("created_utc is not an integer", "missing_field") from exc

    if obj.get("body") is not None:
        kind, text = COMMENT, str(obj["body"])
    elif obj.get("title") is not None:
        kind = SUBMISSION
        text = f"{obj['title']} {obj.get('selftext') or ''}"
    else:
        raise EntryParseError("no text field (body or title)", "missing_field")

    flair = obj.get("author_flair_text")
    return Entry(
        id=str(obj["id"]),
        author=str(obj["author"]),
        subreddit=str(obj["subreddit"]),
        created_utc=created,
        text=text,
        kind=kind,
        flair_text=str(flair) if flair is not None else None,
    )


def filter_reason(entry: Entry, window: tuple[int | None, int | None] | None = None) -> str | None:
    """Why ``entry`` should be excluded, or None if it should be kept.

    The window is half-open: start <= created_utc < end, with either bound
    optional.
    """
    if entry.author in SENTINEL_AUTHORS:
        return "sentinel_author"
    if not entry.author or not entry.subreddit:
        return "empty_fields"
    if window is not None:
        start, end = window
        if start is not None and entry.created_utc < start:
            return "outside_window"
        if end is not None and entry.created_utc >= end:
            return "outside_window"
    return None


@dataclass
class IngestSummary:
    """Line-level tallies from one ingest pass."""

    lines: int = 0
    parsed: int = 0
    skipped_malformed: int = 0
    skipped_missing_field: int = 0
    skipped_sentinel_author: int = 0
    skipped_empty_fields: int = 0
    skipped_outside_window: int = 0
    by_kind: dict = field(default_factory=dict)

    @property
    def indexed(self) -> int:
        return self.parsed - (
            self.skipped_sentinel_author
            + self.skipped_empty_fields
            + self.skipped_outside_window
        )

    @property
    def skipped(self) -> int:
        return self.lines - self.indexed

    def merge(self, other: "IngestSummary") -> "IngestSummary":
        self.lines += other.lines
        self.parsed += other.parsed
        self.skipped_malformed += other.skipped_malformed
        self.skipped_missing_field += other.skipped_missing_field
        self.skipped_sentinel_author += other.skipped_sentinel_author
        self.skipped_empty_fields += other.skipped_empty_fields
        self.skipped_outside_window += other.skipped_outside_window
        for kind, n in other.by_kind.items():
            self.by_kind[kind] = self.by_kind.get(kind, 0) + n
        return self

    def as_dict(self) -> dict:
        return {
            "lines": self.lines,
            "parsed": self.parsed,
            "indexed": self.indexed,
            "skipped": self.skipped,
            "skipped_malformed": self.skipped_malformed,
            "skipped_missing_field": self.skipped_missing_field,
            "skipped_sentinel_author": self.skipped_sentinel_author,
            "skipped_empty_fields": self.skipped_empty_fields,
            "skipped_outside_window": self.skipped_outside_window,
            "by_kind": dict(sorted(self.by_kind.items())),
        }


def open_dump(path: str | Path) -> IO[str]:
    """Open a dump file for text reading, transparently handling .gz."""
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def iter_entries(
    paths: Iterable[str | Path],
    window: tuple[int | None, int | None] | None = None,
    summary: IngestSummary | None = None,
) -> Iterator[Entry]:
    """Stream kept entries from NDJSON files, counting everything else.

    Parse failures are recoverable: the line is tallied and skipped, never
    fatal. Filtered entries (sentinel authors, empty author/subreddit,
    timestamps outside the window) are likewise tallied.
    """
    if summary is None:
        summary = IngestSummary()
    for path in paths:
        with open_dump(path) as fh:
            for line in fh:
                summary.lines += 1
                try:
                    entry = parse_entry(line)
                except EntryParseError as exc:
                    if exc.reason == "malformed_json":
                        summary.skipped_malformed += 1
                    else:
                        summary.skipped_missing_field += 1
                    continue
                summary.parsed += 1
                summary.by_kind[entry.kind] = summary.by_kind.get(entry.kind, 0) + 1
                reason = filter_reason(entry, window)
                if reason == "sentinel_author":
                    summary.skipped_sentinel_author += 1
                    continue
                if reason == "empty_fields":
                    summary.skipped_empty_fields += 1
                    continue
                if reason == "outside_window":
                    summary.skipped_outside_window += 1
                    continue
                yield entry
