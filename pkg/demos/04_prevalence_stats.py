"""Per-state cohort prevalence, census-division roll-ups, and regressions.

Builds a synthetic geolocated population, marks a cohort whose rate is
driven by one indicator, and walks the whole stats stage: prevalence per
100k, division aggregation (sum counts first, divide once), correlation
with two state indicators, and a two-period comparison. Run from the
repository root:

    python3 demos/04_prevalence_stats.py
"""

import random

from redcohort.gazetteer import STATE_CODES
from redcohort.stats import (
    IndicatorSeries,
    aggregate_divisions,
    compute_prevalence,
    load_division_map,
    pearson,
    regression_report,
    temporal_compare,
)


def main() -> None:
    rng = random.Random(7)
    states = sorted(STATE_CODES)

    # geolocated population: a few thousand authors per state; the cohort
    # rate rises with a per-state "exposure" indicator plus noise
    exposure = {s: rng.uniform(5.0, 25.0) for s in states}
    unrelated = {s: rng.uniform(0.0, 100.0) for s in states}
    geolocated: dict[str, str] = {}
    cohort: set[str] = set()
    for s in states:
        population = rng.randint(2_000, 6_000)
        rate = 0.004 * exposure[s] + rng.gauss(0, 0.004)
        for i in range(population):
            author = f"{s.lower()}_{i}"
            geolocated[author] = s
            if rng.random() < max(rate, 0.0):
                cohort.add(author)

    records = compute_prevalence(cohort, geolocated)
    print("five states by prevalence per 100k geolocated authors:")
    for rec in sorted(records, key=lambda r: -r.prevalence)[:5]:
        print(f"  {rec.state}: {rec.cohort_authors:4d} of "
              f"{rec.geolocated_authors} -> {rec.prevalence:8.2f}")

    print("\ncensus divisions (counts summed before the division):")
    for div in aggregate_divisions(records, load_division_map()):
        print(f"  {div.region:9s} {div.division:18s} {div.prevalence:8.2f}")

    report = regression_report(
        records,
        [IndicatorSeries("exposure", exposure),
         IndicatorSeries("unrelated", unrelated)],
    )
    print("\ncorrelations (r, two-sided p):")
    for label, (r, p) in report.correlations.items():
        print(f"  {label:28s} r={r:+.3f}  p={p:.2e}")
    print(f"fit coefficients: { {k: round(v, 3) for k, v in report.coefficients.items()} }")

    # same states, a later window where every count grew 10%
    later = [
        type(rec)(rec.state, round(rec.cohort_authors * 1.1),
                  rec.geolocated_authors)
        for rec in records
    ]
    deltas = temporal_compare(records, later)
    decreased = [d.state for d in deltas if d.decreased]
    print(f"\nperiod-over-period: {len(decreased)} states decreased "
          f"({decreased or 'none'})")
    example = deltas[0]
    print(f"  e.g. {example.state}: {example.prevalence_a:.2f} -> "
          f"{example.prevalence_b:.2f} ({example.relative_change:+.1%})")


if __name__ == "__main__":
    main()
