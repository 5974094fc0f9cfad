"""Per-state prevalence, census-division aggregation, correlation, regression.

Prevalence is authors-of-interest per 100,000 geolocated authors, computed
exactly from the two integer counts. Aggregation to census divisions sums the
counts first and divides once — it is not a mean of member-state rates.
Pearson correlations come with exact two-sided p-values through the Student-t
tail (no normal approximation), and the regression is ordinary least squares
with an intercept.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .gazetteer import STATE_CODES
from .special import student_t_two_sided_p

PER_CAPITA_BASE = 100_000

REGION_ORDER = ("Northeast", "Midwest", "South", "West")


@dataclass(frozen=True)
class PrevalenceRecord:
    state: str
    cohort_authors: int
    geolocated_authors: int

    def __post_init__(self):
        if self.geolocated_authors <= 0:
            raise ValueError(
                f"{self.state}: geolocated author count must be positive"
            )
        if self.cohort_authors < 0:
            raise ValueError(f"{self.state}: negative cohort count")

    @property
    def prevalence(self) -> float:
        """Cohort authors per 100,000 geolocated authors, exact."""
        return PER_CAPITA_BASE * self.cohort_authors / self.geolocated_authors


@dataclass(frozen=True)
class DivisionRecord:
    region: str
    division: str
    cohort_authors: int
    geolocated_authors: int

    @property
    def prevalence(self) -> float:
        return PER_CAPITA_BASE * self.cohort_authors / self.geolocated_authors


def compute_prevalence(
    cohort: Iterable[str], geolocated: Mapping[str, str]
) -> list[PrevalenceRecord]:
    """Per-state records over the geolocated author map (author -> state).

    States that geolocated nobody are absent from the output rather than
    carrying a zero denominator.
    """
    if not geolocated:
        raise ValueError("no geolocated authors")
    cohort = set(cohort)
    per_state_geo = Counter(geolocated.values())
    per_state_cohort = Counter(
        geolocated[a] for a in cohort if a in geolocated
    )
    return [
        PrevalenceRecord(state, per_state_cohort.get(state, 0), per_state_geo[state])
        for state in sorted(per_state_geo)
    ]


def load_division_map(path: str | Path | None = None) -> dict[str, tuple]:
    """state code -> (region, division); the packaged table covers all 51."""
    if path is None:
        text = (
            resources.files("redcohort") / "data" / "census_divisions.csv"
        ).read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    reader = csv.DictReader(text.splitlines())
    header = reader.fieldnames or []
    for column in ("state_code", "region", "division"):
        if column not in header:
            raise ValueError(f"division map missing column {column!r}")
    out: dict[str, tuple] = {}
    for row in reader:
        state = row["state_code"].strip().upper()
        if state not in STATE_CODES:
            raise ValueError(f"division map has unknown state {state!r}")
        out[state] = (row["region"].strip(), row["division"].strip())
    return out


def aggregate_divisions(
    records: Sequence[PrevalenceRecord], division_map: Mapping[str, tuple]
) -> list[DivisionRecord]:
    """Sum counts into census divisions, then divide once per division.

    Output is ordered by region (Northeast, Midwest, South, West) and
    division name. A state missing from the map raises.
    """
    sums: dict[tuple, list] = {}
    for record in records:
        if record.state not in division_map:
            raise KeyError(f"state not in division map: {record.state!r}")
        key = division_map[record.state]
        bucket = sums.setdefault(key, [0, 0])
        bucket[0] += record.cohort_authors
        bucket[1] += record.geolocated_authors
    def sort_key(item):
        (region, division), _ = item
        region_rank = (
            REGION_ORDER.index(region) if region in REGION_ORDER else len(REGION_ORDER)
        )
        return (region_rank, division)
    return [
        DivisionRecord(region, division, cohort, geo)
        for (region, division), (cohort, geo) in sorted(sums.items(), key=sort_key)
    ]


# -- correlation and regression -------------------------------------------


def pearson(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """(r, two-sided p) for paired samples.

    Needs at least 3 points and nonzero variance on both sides; the p-value
    is the exact Student-t tail with k-2 degrees of freedom.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.ndim != 1 or ya.ndim != 1 or xa.shape != ya.shape:
        raise ValueError("inputs must be 1-d and the same length")
    k = xa.size
    if k < 3:
        raise ValueError("need at least 3 paired points")
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    sx = float(np.sqrt(xc @ xc))
    sy = float(np.sqrt(yc @ yc))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("zero variance makes the correlation undefined")
    r = float(xc @ yc) / (sx * sy)
    r = max(-1.0, min(1.0, r))
    df = k - 2
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * (df / (1.0 - r * r)) ** 0.5
        p = student_t_two_sided_p(t, df)
    return r, p


def ols_fit(
    features: Sequence[Sequence[float]], y: Sequence[float]
) -> tuple[np.ndarray, np.ndarray]:
    """(coefficients, fitted values) for least squares with an intercept.

    ``features`` is row-per-observation. The coefficient vector starts with
    the intercept. Underdetermined or rank-deficient systems raise instead
    of returning one of many solutions.
    """
    X = np.asarray(features, dtype=float)
    yv = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValueError("feature matrix must be 2-d")
    k, f = X.shape
    if yv.shape != (k,):
        raise ValueError("response length does not match feature rows")
    if k <= f + 1:
        raise ValueError("need more observations than coefficients")
    Xa = np.column_stack([np.ones(k), X])
    if np.linalg.matrix_rank(Xa) < f + 1:
        raise ValueError("feature matrix is rank deficient")
    coef, *_ = np.linalg.lstsq(Xa, yv, rcond=None)
    fitted = Xa @ coef
    return coef, fitted


@dataclass(frozen=True)
class IndicatorSeries:
    """Named per-state indicator (e.g. a mortality or prescribing rate)."""

    name: str
    values: Mapping[str, float]

    def __post_init__(self):
        unknown = sorted(set(self.values) - STATE_CODES)
        if unknown:
            raise ValueError(f"{self.name}: unknown state codes {', '.join(unknown)}")

    @classmethod
    def from_csv(cls, path: str | Path, name: str | None = None) -> "IndicatorSeries":
        values: dict[str, float] = {}
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for column in ("state_code", "value"):
                if column not in header:
                    raise ValueError(f"{path}: missing column {column!r}")
            for row in reader:
                values[row["state_code"].strip().upper()] = float(row["value"])
        return cls(name or Path(path).stem, values)


@dataclass
class StatsReport:
    correlations: dict
    coefficients: dict
    log_transform: bool
    states: list

    def as_dict(self) -> dict:
        return {
            "log_transform": self.log_transform,
            "n_states": len(self.states),
            "states": list(self.states),
            "correlations": {
                label: {"r": r, "p_value": p}
                for label, (r, p) in self.correlations.items()
            },
            "coefficients": dict(self.coefficients),
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )


def regression_report(
    prevalence: Sequence[PrevalenceRecord],
    indicators: Sequence[IndicatorSeries],
    log_transform: bool = False,
) -> StatsReport:
    """Correlations and a two-feature OLS of prevalence on the indicators.

    All three series must cover exactly the same states; any mismatch raises
    with the offending states listed. With ``log_transform`` every series is
    logged first (values must then be positive).
    """
    if len(indicators) != 2:
        raise ValueError("expected exactly two indicator series")
    prev_map = {r.state: r.prevalence for r in prevalence}
    states = sorted(prev_map)
    for series in indicators:
        missing = sorted(set(states) - set(series.values))
        extra = sorted(set(series.values) - set(states))
        if missing or extra:
            parts = []
            if missing:
                parts.append(f"missing from {series.name}: {', '.join(missing)}")
            if extra:
                parts.append(f"extra in {series.name}: {', '.join(extra)}")
            raise ValueError("state sets differ; " + "; ".join(parts))

    def vector(mapping: Mapping[str, float]) -> np.ndarray:
        v = np.asarray([float(mapping[s]) for s in states])
        if log_transform:
            if np.any(v <= 0):
                raise ValueError("log transform needs strictly positive values")
            v = np.log(v)
        return v

    y = vector(prev_map)
    a = vector(indicators[0].values)
    b = vector(indicators[1].values)
    coef, fitted = ols_fit(np.column_stack([a, b]), y)
    correlations = {
        f"prevalence_vs_{indicators[0].name}": pearson(y, a),
        f"prevalence_vs_{indicators[1].name}": pearson(y, b),
        f"{indicators[0].name}_vs_{indicators[1].name}": pearson(a, b),
        "fitted_vs_prevalence": pearson(fitted, y),
    }
    coefficients = {
        "intercept": float(coef[0]),
        indicators[0].name: float(coef[1]),
        indicators[1].name: float(coef[2]),
    }
    return StatsReport(correlations, coefficients, log_transform, states)


# -- temporal comparison --------------------------------------------------


@dataclass(frozen=True)
class PrevalenceDelta:
    state: str
    prevalence_a: float | None
    prevalence_b: float | None
    relative_change: float | None
    decreased: bool | None
    missing_in: str | None  # "a", "b", or None when present in both


def temporal_compare(
    records_a: Sequence[PrevalenceRecord], records_b: Sequence[PrevalenceRecord]
) -> list[PrevalenceDelta]:
    """Relative change per state between two record sets.

    States present in only one set are flagged, never dropped. Relative
    change is (b - a) / a; when a == 0 it is left undefined (None) but the
    decrease flag is still reported.
    """
    map_a = {r.state: r for r in records_a}
    map_b = {r.state: r for r in records_b}
    out = []
    for state in sorted(set(map_a) | set(map_b)):
        a = map_a.get(state)
        b = map_b.get(state)
        if a is None:
            out.append(PrevalenceDelta(state, None, b.prevalence, None, None, "a"))
            continue
        if b is None:
            out.append(PrevalenceDelta(state, a.prevalence, None, None, None, "b"))
            continue
        pa, pb = a.prevalence, b.prevalence
        relative = (pb - pa) / pa if pa != 0 else None
        out.append(PrevalenceDelta(state, pa, pb, relative, pb < pa, None))
    return out


# -- table I/O ------------------------------------------------------------


def write_prevalence_csv(
    path: str | Path, records: Sequence[PrevalenceRecord]
) -> None:
    """state_code,cohort_authors,geolocated_authors,prevalence (2 decimals).

    The counts are exact; the prevalence column is display-rounded and is
    recomputed from the counts on read.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["state_code", "cohort_authors", "geolocated_authors", "prevalence"]
        )
        for r in records:
            writer.writerow(
                [r.state, r.cohort_authors, r.geolocated_authors, f"{r.prevalence:.2f}"]
            )


def read_prevalence_csv(path: str | Path) -> list[PrevalenceRecord]:
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in ("state_code", "cohort_authors", "geolocated_authors"):
            if column not in header:
                raise ValueError(f"{path}: missing column {column!r}")
        for row in reader:
            records.append(
                PrevalenceRecord(
                    row["state_code"].strip().upper(),
                    int(row["cohort_authors"]),
                    int(row["geolocated_authors"]),
                )
            )
    return records


def write_division_csv(path: str | Path, records: Sequence[DivisionRecord]) -> None:
    """region,division,cohort_authors,geolocated_authors,prevalence (2 dp)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["region", "division", "cohort_authors", "geolocated_authors", "prevalence"]
        )
        for r in records:
            writer.writerow(
                [
                    r.region,
                    r.division,
                    r.cohort_authors,
                    r.geolocated_authors,
                    f"{r.prevalence:.2f}",
                ]
            )


def write_delta_csv(path: str | Path, deltas: Sequence[PrevalenceDelta]) -> None:
    """state_code,prevalence_a,prevalence_b,relative_change,decreased,missing_in."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "state_code",
                "prevalence_a",
                "prevalence_b",
                "relative_change",
                "decreased",
                "missing_in",
            ]
        )
        for d in deltas:
            writer.writerow(
                [
                    d.state,
                    "" if d.prevalence_a is None else f"{d.prevalence_a:.2f}",
                    "" if d.prevalence_b is None else f"{d.prevalence_b:.2f}",
                    "" if d.relative_change is None else repr(d.relative_change),
                    "" if d.decreased is None else str(d.decreased).lower(),
                    d.missing_in or "",
                ]
            )


def read_cohort_file(path: str | Path) -> set:
    """One author per line; blank lines ignored."""
    authors = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            name = line.strip()
            if name:
                authors.add(name)
    return authors
