"""Author-to-state assignment from three signals, merged with fixed priority.

Signals: explicit self-reports ("I live in ..."), location flairs mapped
through a configured table, and activity in communities tied to a place.
Self-reports, when consistent, beat everything; otherwise flair and community
occurrence counts are summed and the author is assigned only when a unique
most-frequent state exists. Ambiguity always drops the author rather than
guessing.
"""

from __future__ import annotations

import csv
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Tuple

from .entries import Entry
from .gazetteer import Gazetteer, STATE_CODES

SOURCE_SELF_REPORT = "self_report"
SOURCE_FLAIR = "flair"
SOURCE_LOCATION_SUBREDDIT = "location_subreddit"
SOURCE_MERGED = "merged"

#: Trigger phrase for explicit self-reports, matched case-insensitively.
SELF_REPORT_PHRASE = re.compile(r"\bi\s+live\s+in\b", re.IGNORECASE)

#: The location expression runs from the phrase to the end of the sentence,
#: capped at this many whitespace tokens.
SELF_REPORT_WINDOW_TOKENS = 6

_SENTENCE_END = re.compile(r"[.!?\n]")


@dataclass(frozen=True)
class GeoAssignment:
    author: str
    state: str
    source: str
    counts: Mapping[str, int]  # state -> occurrences seen for this author

    def __post_init__(self):
        if self.state not in STATE_CODES:
            raise ValueError(f"unknown state code {self.state!r}")


# -- self-reports ---------------------------------------------------------


def extract_self_report_candidates(entries: Iterable[Entry]) -> list:
    """(author, expression) pairs for every self-report phrase occurrence.

    One entry can contribute several pairs; empty expressions (phrase at end
    of text) are dropped.
    """
    out = []
    for entry in entries:
        for match in SELF_REPORT_PHRASE.finditer(entry.text):
            expression = _candidate_window(entry.text, match.end())
            if expression:
                out.append((entry.author, expression))
    return out


def _candidate_window(text: str, start: int) -> str:
    rest = text[start:]
    stop = _SENTENCE_END.search(rest)
    if stop:
        rest = rest[: stop.start()]
    tokens = rest.split()
    return " ".join(tokens[:SELF_REPORT_WINDOW_TOKENS])


def resolve_self_reports(
    candidates: Iterable[Tuple[str, str]], gazetteer: Gazetteer
) -> list:
    """(author, state) for every candidate whose expression resolves."""
    resolved = []
    for author, expression in candidates:
        state = gazetteer.resolve(expression)
        if state is not None:
            resolved.append((author, state))
    return resolved


def self_report_assignments(
    resolved: Iterable[Tuple[str, str]],
) -> dict[str, GeoAssignment]:
    """Assign authors whose resolved self-reports all name the same state.

    An author with conflicting resolved reports is dropped entirely from
    this source.
    """
    per_author: dict[str, Counter] = {}
    for author, state in resolved:
        per_author.setdefault(author, Counter())[state] += 1
    out: dict[str, GeoAssignment] = {}
    for author, counts in per_author.items():
        states = set(counts)
        if len(states) == 1:
            (state,) = states
            out[author] = GeoAssignment(
                author, state, SOURCE_SELF_REPORT, dict(counts)
            )
    return out


# -- flairs and location communities --------------------------------------


def flair_state_counts(
    entries: Iterable[Entry], flair_map: Mapping[Tuple[str, str], str]
) -> dict[str, Counter]:
    """Per-author state occurrence counts from mapped flairs.

    Keys of ``flair_map`` are (subreddit lowercased, exact flair text).
    """
    per_author: dict[str, Counter] = {}
    for entry in entries:
        if entry.flair_text is None:
            continue
        state = flair_map.get((entry.subreddit.lower(), entry.flair_text))
        if state is not None:
            per_author.setdefault(entry.author, Counter())[state] += 1
    return per_author


def location_subreddit_counts(
    entries: Iterable[Entry], location_map: Mapping[str, str]
) -> dict[str, Counter]:
    """Per-author state occurrence counts from posting in place communities."""
    per_author: dict[str, Counter] = {}
    for entry in entries:
        state = location_map.get(entry.subreddit.lower())
        if state is not None:
            per_author.setdefault(entry.author, Counter())[state] += 1
    return per_author


def _unique_argmax(counts: Mapping[str, int]) -> str | None:
    if not counts:
        return None
    best = max(counts.values())
    leaders = [s for s, n in counts.items() if n == best]
    return leaders[0] if len(leaders) == 1 else None


def _finalize(counts_by_author: Mapping[str, Counter], source: str) -> dict:
    out: dict[str, GeoAssignment] = {}
    for author, counts in counts_by_author.items():
        state = _unique_argmax(counts)
        if state is not None:
            out[author] = GeoAssignment(author, state, source, dict(counts))
    return out


def flair_assignments(
    entries: Iterable[Entry], flair_map: Mapping[Tuple[str, str], str]
) -> dict[str, GeoAssignment]:
    """Unique most-frequent flair state per author; ties drop the author."""
    return _finalize(flair_state_counts(entries, flair_map), SOURCE_FLAIR)


def location_subreddit_assignments(
    entries: Iterable[Entry], location_map: Mapping[str, str]
) -> dict[str, GeoAssignment]:
    """Unique most-frequent community state per author; ties drop the author."""
    return _finalize(
        location_subreddit_counts(entries, location_map), SOURCE_LOCATION_SUBREDDIT
    )


# -- merge ----------------------------------------------------------------


def merge_assignments(
    self_report: Mapping[str, GeoAssignment],
    flair_counts: Mapping[str, Mapping[str, int]],
    locsub_counts: Mapping[str, Mapping[str, int]],
) -> dict[str, GeoAssignment]:
    """Combine the three signals with self-report priority.

    A self-reported author keeps that state no matter what the other two
    signals say. Everyone else gets the summed flair + community counts; a
    unique most-frequent state assigns the author, a tie drops them. The two
    count maps are the raw per-author tallies — an author whose single-source
    profile was tied still contributes those counts here.
    """
    authors = set(self_report) | set(flair_counts) | set(locsub_counts)
    out: dict[str, GeoAssignment] = {}
    for author in sorted(authors):
        if author in self_report:
            base = self_report[author]
            out[author] = GeoAssignment(
                author, base.state, SOURCE_MERGED, dict(base.counts)
            )
            continue
        combined = Counter(flair_counts.get(author, {}))
        combined.update(locsub_counts.get(author, {}))
        state = _unique_argmax(combined)
        if state is not None:
            out[author] = GeoAssignment(author, state, SOURCE_MERGED, dict(combined))
    return out


def state_counts(assignments: Mapping[str, GeoAssignment]) -> dict[str, int]:
    """Assigned authors per state."""
    counts = Counter(a.state for a in assignments.values())
    return dict(sorted(counts.items()))


def census_agreement(
    assignments: Mapping[str, GeoAssignment],
    census: Mapping[str, float],
) -> tuple[dict[str, int], float, float]:
    """(per-state counts, Pearson r, p) of log census vs. log assigned count.

    States with zero assigned authors are excluded (log is undefined there);
    the census table must cover all 51 codes.
    """
    from .stats import pearson  # local import: stats also imports gazetteer

    missing = sorted(STATE_CODES - set(census))
    if missing:
        raise ValueError(f"census table missing states: {', '.join(missing)}")
    counts = state_counts(assignments)
    nonzero = sorted(s for s, n in counts.items() if n > 0)
    if len(nonzero) < 3:
        raise ValueError(
            "census agreement undefined: fewer than 3 states with assigned authors"
        )
    log_census = [math.log(float(census[s])) for s in nonzero]
    log_counts = [math.log(counts[s]) for s in nonzero]
    r, p = pearson(log_census, log_counts)
    return counts, r, p


# -- table and file I/O ---------------------------------------------------


def _read_csv_rows(path: str | Path, required: tuple) -> Iterable[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {', '.join(missing)}")
        yield from reader


def load_location_map(path: str | Path) -> dict[str, str]:
    """CSV subreddit,state_code -> {subreddit lowercased: state}."""
    out: dict[str, str] = {}
    for row in _read_csv_rows(path, ("subreddit", "state_code")):
        state = row["state_code"].strip().upper()
        if state not in STATE_CODES:
            raise ValueError(f"{path}: unknown state code {state!r}")
        out[row["subreddit"].strip().lower()] = state
    return out


def load_flair_map(path: str | Path) -> dict[Tuple[str, str], str]:
    """CSV subreddit,flair_text,state_code keyed by (subreddit, flair)."""
    out: dict[Tuple[str, str], str] = {}
    for row in _read_csv_rows(path, ("subreddit", "flair_text", "state_code")):
        state = row["state_code"].strip().upper()
        if state not in STATE_CODES:
            raise ValueError(f"{path}: unknown state code {state!r}")
        out[(row["subreddit"].strip().lower(), row["flair_text"])] = state
    return out


def load_census_csv(path: str | Path) -> dict[str, float]:
    """CSV state_code,population -> {state: population}."""
    out: dict[str, float] = {}
    for row in _read_csv_rows(path, ("state_code", "population")):
        state = row["state_code"].strip().upper()
        if state not in STATE_CODES:
            raise ValueError(f"{path}: unknown state code {state!r}")
        population = float(row["population"])
        if population <= 0:
            raise ValueError(f"{path}: population must be positive for {state}")
        out[state] = population
    return out


def write_assignments_csv(
    path: str | Path, assignments: Mapping[str, GeoAssignment]
) -> None:
    """author,state_code,source — UTF-8, comma, header, LF."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["author", "state_code", "source"])
        for author in sorted(assignments):
            a = assignments[author]
            writer.writerow([a.author, a.state, a.source])


def read_assignments_csv(path: str | Path) -> dict[str, str]:
    """author -> state_code from a previously written assignment table."""
    out: dict[str, str] = {}
    for row in _read_csv_rows(path, ("author", "state_code")):
        state = row["state_code"].strip().upper()
        if state not in STATE_CODES:
            raise ValueError(f"{path}: unknown state code {state!r}")
        out[row["author"]] = state
    return out


def write_state_counts_csv(path: str | Path, counts: Mapping[str, int]) -> None:
    """state_code,authors — UTF-8, comma, header, LF."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["state_code", "authors"])
        for state in sorted(counts):
            writer.writerow([state, counts[state]])
