"""US state resolution for free-text location expressions.

Resolution runs three stages in fixed order and the first stage that matches
anything wins:

1. city-plus-state phrases ("Newark, CA", "Kansas City MO") for cities with
   population above 20,000 — the comma is optional because tokenization
   drops punctuation anyway;
2. bare city names or well-known alternates for cities above 200,000, and
   only when the surface form is unambiguous among those cities;
3. bare state names or two-letter codes.

Within a stage the longest token span wins; remaining ties go to character
length, then the earliest position. Everything is case-insensitive.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .textnorm import tokenize

US_STATES: dict[str, str] = {
    "AL": "Alabama", "AK": "Alaska", "AZ": "Arizona", "AR": "Arkansas",
    "CA": "California", "CO": "Colorado", "CT": "Connecticut",
    "DE": "Delaware", "DC": "District of Columbia", "FL": "Florida",
    "GA": "Georgia", "HI": "Hawaii", "ID": "Idaho", "IL": "Illinois",
    "IN": "Indiana", "IA": "Iowa", "KS": "Kansas", "KY": "Kentucky",
    "LA": "Louisiana", "ME": "Maine", "MD": "Maryland",
    "MA": "Massachusetts", "MI": "Michigan", "MN": "Minnesota",
    "MS": "Mississippi", "MO": "Missouri", "MT": "Montana",
    "NE": "Nebraska", "NV": "Nevada", "NH": "New Hampshire",
    "NJ": "New Jersey", "NM": "New Mexico", "NY": "New York",
    "NC": "North Carolina", "ND": "North Dakota", "OH": "Ohio",
    "OK": "Oklahoma", "OR": "Oregon", "PA": "Pennsylvania",
    "RI": "Rhode Island", "SC": "South Carolina", "SD": "South Dakota",
    "TN": "Tennessee", "TX": "Texas", "UT": "Utah", "VT": "Vermont",
    "VA": "Virginia", "WA": "Washington", "WV": "West Virginia",
    "WI": "Wisconsin", "WY": "Wyoming",
}

STATE_CODES = frozenset(US_STATES)

CITY_STATE_MIN_POP = 20_000
BARE_CITY_MIN_POP = 200_000

# Beyond name and code, a few surfaces people actually write.
_EXTRA_STATE_SURFACES = {
    "DC": ("washington dc", "washington d c"),
}


@dataclass(frozen=True)
class CityRecord:
    name: str
    state: str
    population: int
    alternates: tuple = ()

    def __post_init__(self):
        if self.state not in STATE_CODES:
            raise ValueError(f"unknown state code {self.state!r} for {self.name!r}")
        if self.population < 0:
            raise ValueError(f"negative population for {self.name!r}")


class Gazetteer:
    """City table plus the fixed state set, pre-tokenized for matching."""

    def __init__(self, cities: Iterable[CityRecord]):
        self.cities = tuple(cities)

        # stage 1: city token sequences bucketed by first token
        self._city_bucket: dict[str, list] = {}
        for rec in self.cities:
            toks = tuple(tokenize(rec.name))
            if not toks:
                continue
            self._city_bucket.setdefault(toks[0], []).append((toks, rec))

        # stage 2: bare surfaces (names and alternates) of big cities,
        # grouped so ambiguity across states is visible
        surface_states: dict[tuple, set] = {}
        for rec in self.cities:
            if rec.population <= BARE_CITY_MIN_POP:
                continue
            for surface in (rec.name, *rec.alternates):
                toks = tuple(tokenize(surface))
                if toks:
                    surface_states.setdefault(toks, set()).add(rec.state)
        self._bare_bucket: dict[str, list] = {}
        for toks, states in surface_states.items():
            self._bare_bucket.setdefault(toks[0], []).append((toks, frozenset(states)))

        # stage 3 (and stage-1 suffixes): state surfaces
        self._state_surfaces: dict[str, tuple] = {}
        self._state_bucket: dict[str, list] = {}
        for code, name in US_STATES.items():
            surfaces = [tuple(tokenize(name)), (code.lower(),)]
            for extra in _EXTRA_STATE_SURFACES.get(code, ()):
                surfaces.append(tuple(tokenize(extra)))
            self._state_surfaces[code] = tuple(surfaces)
            for toks in surfaces:
                self._state_bucket.setdefault(toks[0], []).append((toks, code))

    @classmethod
    def load(cls, path: str | Path) -> "Gazetteer":
        """Read a TSV of name, state code, population[, pipe-separated alternates]."""
        return cls.from_tsv_text(Path(path).read_text(encoding="utf-8"), source=str(path))

    @classmethod
    def from_tsv_text(cls, text: str, source: str = "<gazetteer>") -> "Gazetteer":
        records = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                raise ValueError(
                    f"{source}:{lineno}: expected name, state, population"
                )
            name, state = parts[0].strip(), parts[1].strip().upper()
            try:
                population = int(parts[2])
            except ValueError:
                raise ValueError(
                    f"{source}:{lineno}: population is not an integer"
                ) from None
            alternates = ()
            if len(parts) > 3 and parts[3].strip():
                alternates = tuple(
                    alt.strip() for alt in parts[3].split("|") if alt.strip()
                )
            records.append(CityRecord(name, state, population, alternates))
        return cls(records)

    # -- matching ---------------------------------------------------------

    def resolve(self, expression: str) -> str | None:
        """State code for ``expression``, or None when nothing resolves."""
        toks = tokenize(expression)
        if not toks:
            return None
        return (
            self._match_city_state(toks)
            or self._match_bare_city(toks)
            or self._match_state(toks)
        )

    def _match_city_state(self, toks: list) -> str | None:
        best = None
        for i in range(len(toks)):
            for city_toks, rec in self._city_bucket.get(toks[i], ()):
                if rec.population <= CITY_STATE_MIN_POP:
                    continue
                j = i + len(city_toks)
                if tuple(toks[i:j]) != city_toks:
                    continue
                for state_toks in self._state_surfaces[rec.state]:
                    k = j + len(state_toks)
                    if tuple(toks[j:k]) == state_toks:
                        best = _better(best, _candidate(city_toks + state_toks, i, rec.state))
        return best[3] if best else None

    def _match_bare_city(self, toks: list) -> str | None:
        best = None
        for i in range(len(toks)):
            for surface_toks, states in self._bare_bucket.get(toks[i], ()):
                j = i + len(surface_toks)
                if tuple(toks[i:j]) != surface_toks:
                    continue
                if len(states) != 1:
                    continue  # ambiguous among big cities: resolves nothing
                (state,) = states
                best = _better(best, _candidate(surface_toks, i, state))
        return best[3] if best else None

    def _match_state(self, toks: list) -> str | None:
        best = None
        for i in range(len(toks)):
            for surface_toks, code in self._state_bucket.get(toks[i], ()):
                j = i + len(surface_toks)
                if tuple(toks[i:j]) == surface_toks:
                    best = _better(best, _candidate(surface_toks, i, code))
        return best[3] if best else None


def _candidate(span_toks: tuple, position: int, state: str) -> tuple:
    return (len(span_toks), sum(len(t) for t in span_toks), -position, state)


def _better(current, challenger):
    if current is None or challenger[:3] > current[:3]:
        return challenger
    return current


def resolve_expression(expression: str, gazetteer: Gazetteer) -> str | None:
    """Staged resolution of a location expression to a state code."""
    return gazetteer.resolve(expression)
