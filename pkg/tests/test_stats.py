import random

import numpy as np
import pytest

from redcohort.stats import (
    DivisionRecord,
    IndicatorSeries,
    PrevalenceRecord,
    aggregate_divisions,
    compute_prevalence,
    load_division_map,
    ols_fit,
    pearson,
    read_cohort_file,
    read_prevalence_csv,
    regression_report,
    temporal_compare,
    write_delta_csv,
    write_division_csv,
    write_prevalence_csv,
)

from oracles import brute_pearson_r, normal_equation_ols


DIVISION_ORDER = [
    "Middle Atlantic",
    "New England",
    "East North Central",
    "West North Central",
    "East South Central",
    "South Atlantic",
    "West South Central",
    "Mountain",
    "Pacific",
]


def test_prevalence_record_exact_arithmetic():
    assert PrevalenceRecord("CA", 7, 100_000).prevalence == 7.0
    assert PrevalenceRecord("NY", 3, 200_000).prevalence == 1.5
    assert PrevalenceRecord("TX", 0, 50).prevalence == 0.0
    with pytest.raises(ValueError):
        PrevalenceRecord("CA", 1, 0)
    with pytest.raises(ValueError):
        PrevalenceRecord("CA", -1, 10)


def test_compute_prevalence_counts():
    geolocated = {"a1": "CA", "a2": "CA", "a3": "NY", "a4": "TX"}
    cohort = {"a1", "a2", "ghost"}  # non-geolocated cohort member drops out
    records = compute_prevalence(cohort, geolocated)
    assert [(r.state, r.cohort_authors, r.geolocated_authors) for r in records] == [
        ("CA", 2, 2),
        ("NY", 0, 1),
        ("TX", 0, 1),
    ]
    assert records[0].prevalence == 100_000.0
    with pytest.raises(ValueError):
        compute_prevalence(cohort, {})


def test_whole_population_cohort_rate_is_base():
    geolocated = {f"u{i}": ("CA" if i % 2 else "NY") for i in range(10)}
    for r in compute_prevalence(set(geolocated), geolocated):
        assert r.prevalence == 100_000.0


def test_default_division_map_covers_every_state():
    table = load_division_map()
    assert len(table) == 51
    assert table["CA"] == ("West", "Pacific")
    assert table["NY"] == ("Northeast", "Middle Atlantic")
    assert table["IL"] == ("Midwest", "East North Central")
    assert table["AL"] == ("South", "East South Central")
    assert table["DC"] == ("South", "South Atlantic")
    assert {d for _, d in table.values()} == set(DIVISION_ORDER)


def test_division_map_validation(tmp_path):
    bad_cols = tmp_path / "cols.csv"
    bad_cols.write_text("state_code,region\nCA,West\n")
    with pytest.raises(ValueError, match="missing column"):
        load_division_map(bad_cols)
    bad_state = tmp_path / "state.csv"
    bad_state.write_text("state_code,region,division\nZZ,West,Pacific\n")
    with pytest.raises(ValueError, match="unknown state"):
        load_division_map(bad_state)


def test_divisions_sum_counts_before_dividing():
    table = {"ME": ("Northeast", "New England"), "VT": ("Northeast", "New England")}
    records = [PrevalenceRecord("ME", 1, 3), PrevalenceRecord("VT", 1, 1)]
    (division,) = aggregate_divisions(records, table)
    assert division.cohort_authors == 2
    assert division.geolocated_authors == 4
    # pooled: 2/4 of the base — NOT the mean of the two per-state rates
    assert division.prevalence == 50_000.0
    per_state_mean = (records[0].prevalence + records[1].prevalence) / 2
    assert division.prevalence != pytest.approx(per_state_mean)


def test_division_output_order_matches_reference_table():
    table = load_division_map()
    records = [PrevalenceRecord(state, 1, 100) for state in sorted(table)]
    divisions = aggregate_divisions(records, table)
    assert [d.division for d in divisions] == DIVISION_ORDER
    assert [d.region for d in divisions] == [
        "Northeast",
        "Northeast",
        "Midwest",
        "Midwest",
        "South",
        "South",
        "South",
        "West",
        "West",
    ]


def test_division_aggregation_conserves_counts(rng):
    table = load_division_map()
    states = random.Random(5).sample(sorted(table), 30)
    records = [
        PrevalenceRecord(s, rng.randint(0, 50), rng.randint(51, 500)) for s in states
    ]
    divisions = aggregate_divisions(records, table)
    assert sum(d.cohort_authors for d in divisions) == sum(
        r.cohort_authors for r in records
    )
    assert sum(d.geolocated_authors for d in divisions) == sum(
        r.geolocated_authors for r in records
    )


def test_division_unknown_state_raises():
    with pytest.raises(KeyError, match="XX"):
        aggregate_divisions([PrevalenceRecord("XX", 1, 1)], {})


def test_pearson_perfect_lines():
    x = [1.0, 2.0, 3.0, 4.0]
    r, p = pearson(x, [2 * v + 1 for v in x])
    assert r == pytest.approx(1.0, abs=1e-14)
    assert p < 1e-12
    r, p = pearson(x, [-v for v in x])
    assert r == pytest.approx(-1.0, abs=1e-14)
    assert p < 1e-12


def test_pearson_matches_brute_force(rng):
    for _ in range(50):
        k = rng.randint(3, 40)
        x = [rng.gauss(0, 3) for _ in range(k)]
        y = [rng.gauss(1, 2) + 0.4 * v for v in x]
        r, p = pearson(x, y)
        assert r == pytest.approx(brute_pearson_r(x, y), abs=1e-12)
        assert 0.0 <= p <= 1.0


def test_pearson_validation():
    with pytest.raises(ValueError, match="at least 3"):
        pearson([1.0, 2.0], [3.0, 4.0])
    with pytest.raises(ValueError, match="same length"):
        pearson([1.0, 2.0, 3.0], [1.0, 2.0])
    with pytest.raises(ValueError, match="zero variance"):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def test_ols_exact_recovery():
    rng = random.Random(11)
    a = [rng.uniform(0, 10) for _ in range(15)]
    b = [rng.uniform(0, 10) for _ in range(15)]
    y = [3.0 + 2.0 * ai - 1.0 * bi for ai, bi in zip(a, b)]
    coef, fitted = ols_fit(np.column_stack([a, b]), np.asarray(y))
    assert coef == pytest.approx([3.0, 2.0, -1.0], abs=1e-9)
    assert fitted == pytest.approx(y, abs=1e-9)


def test_ols_matches_normal_equations(rng):
    rows = [[rng.uniform(-5, 5), rng.uniform(-5, 5)] for _ in range(20)]
    y = [1.0 + 0.5 * a - 2.0 * b + rng.gauss(0, 0.1) for a, b in rows]
    coef, _ = ols_fit(np.asarray(rows), np.asarray(y))
    want = normal_equation_ols(rows, y)
    assert coef == pytest.approx(want, abs=1e-8)


def test_ols_validation():
    x = np.ones((5, 2))
    with pytest.raises(ValueError, match="rank deficient"):
        ols_fit(np.column_stack([np.arange(5.0), np.arange(5.0)]), np.arange(5.0))
    with pytest.raises(ValueError, match="length"):
        ols_fit(x, np.arange(4.0))
    with pytest.raises(ValueError, match="more observations"):
        ols_fit(np.random.default_rng(0).normal(size=(3, 3)), np.arange(3.0))
    with pytest.raises(ValueError, match="2-d"):
        ols_fit(np.arange(5.0), np.arange(5.0))


def test_indicator_series_validation(tmp_path):
    with pytest.raises(ValueError, match="unknown state codes"):
        IndicatorSeries("x", {"CA": 1.0, "ZZ": 2.0})
    path = tmp_path / "ind.csv"
    path.write_text("state_code,value\nca,12.5\nNY,3\n")
    series = IndicatorSeries.from_csv(path, name="overdose")
    assert series.name == "overdose"
    assert series.values == {"CA": 12.5, "NY": 3.0}
    bad = tmp_path / "bad.csv"
    bad.write_text("state,value\nCA,1\n")
    with pytest.raises(ValueError, match="missing column"):
        IndicatorSeries.from_csv(bad)


def regression_fixture(noise=0.0, n=12, seed=3):
    rng = random.Random(seed)
    states = sorted(load_division_map())[:n]
    records, over, presc = [], {}, {}
    for state in states:
        o = rng.uniform(5, 30)
        pval = rng.uniform(40, 110)
        cohort = max(0, round(4.0 * o + noise * rng.gauss(0, 1)))
        records.append(PrevalenceRecord(state, cohort, 100_000))
        over[state] = o
        presc[state] = pval
    return records, IndicatorSeries("overdose", over), IndicatorSeries("prescribing", presc)


def test_regression_report_labels_and_fit():
    records, over, presc = regression_fixture(noise=0.5)
    report = regression_report(records, [over, presc])
    assert set(report.correlations) == {
        "prevalence_vs_overdose",
        "prevalence_vs_prescribing",
        "overdose_vs_prescribing",
        "fitted_vs_prevalence",
    }
    assert set(report.coefficients) == {"intercept", "overdose", "prescribing"}
    r_fit, _ = report.correlations["fitted_vs_prevalence"]
    r_over, _ = report.correlations["prevalence_vs_overdose"]
    assert r_fit >= abs(r_over) - 1e-12
    assert report.states == [r.state for r in records]
    doc = report.as_dict()
    assert doc["n_states"] == len(records)
    assert doc["correlations"]["fitted_vs_prevalence"]["r"] == pytest.approx(r_fit)


def test_regression_report_requires_matching_states():
    records, over, presc = regression_fixture()
    short = IndicatorSeries("overdose", {
        k: v for k, v in over.values.items() if k != records[0].state
    })
    with pytest.raises(ValueError, match=f"missing from overdose: {records[0].state}"):
        regression_report(records, [short, presc])
    extra = IndicatorSeries("prescribing", dict(presc.values) | {"WY": 1.0})
    with pytest.raises(ValueError, match="extra in prescribing: WY"):
        regression_report(records, [over, extra])
    with pytest.raises(ValueError, match="exactly two"):
        regression_report(records, [over])


def test_regression_report_log_transform():
    records, over, presc = regression_fixture(noise=0.0)
    # strictly positive everywhere -> log path works and changes the fit space
    report = regression_report(records, [over, presc], log_transform=True)
    assert report.log_transform is True
    zero_cohort = [PrevalenceRecord(records[0].state, 0, 100_000)] + list(records[1:])
    with pytest.raises(ValueError, match="strictly positive"):
        regression_report(zero_cohort, [over, presc], log_transform=True)


def test_temporal_compare_flags_and_changes():
    a = [PrevalenceRecord("CA", 10, 100_000), PrevalenceRecord("NY", 4, 100_000)]
    b = [PrevalenceRecord("CA", 5, 100_000), PrevalenceRecord("TX", 2, 100_000)]
    deltas = {d.state: d for d in temporal_compare(a, b)}
    assert set(deltas) == {"CA", "NY", "TX"}
    ca = deltas["CA"]
    assert ca.relative_change == pytest.approx(-0.5)
    assert ca.decreased is True and ca.missing_in is None
    ny = deltas["NY"]
    assert ny.missing_in == "b" and ny.prevalence_b is None
    tx = deltas["TX"]
    assert tx.missing_in == "a" and tx.prevalence_a is None
    # a == 0 leaves the ratio undefined but still reports the direction
    zero = temporal_compare(
        [PrevalenceRecord("FL", 0, 10)], [PrevalenceRecord("FL", 1, 10)]
    )[0]
    assert zero.relative_change is None
    assert zero.decreased is False


def test_prevalence_csv_round_trip(tmp_path):
    records = [
        PrevalenceRecord("CA", 123, 45_678),
        PrevalenceRecord("NY", 0, 999),
    ]
    path = tmp_path / "prevalence.csv"
    write_prevalence_csv(path, records)
    lines = path.read_text().splitlines()
    assert lines[0] == "state_code,cohort_authors,geolocated_authors,prevalence"
    assert lines[1] == f"CA,123,45678,{100_000 * 123 / 45_678:.2f}"
    back = read_prevalence_csv(path)
    assert back == records  # counts are exact, so the rate survives the trip
    assert back[0].prevalence == records[0].prevalence


def test_division_and_delta_csv_headers(tmp_path):
    div_path = tmp_path / "divisions.csv"
    write_division_csv(div_path, [DivisionRecord("West", "Pacific", 3, 400)])
    lines = div_path.read_text().splitlines()
    assert lines[0] == "region,division,cohort_authors,geolocated_authors,prevalence"
    assert lines[1] == "West,Pacific,3,400,750.00"

    delta_path = tmp_path / "delta.csv"
    write_delta_csv(
        delta_path,
        temporal_compare(
            [PrevalenceRecord("CA", 2, 100)], [PrevalenceRecord("CA", 1, 100)]
        ),
    )
    lines = delta_path.read_text().splitlines()
    assert lines[0] == (
        "state_code,prevalence_a,prevalence_b,relative_change,decreased,missing_in"
    )
    assert lines[1].startswith("CA,2000.00,1000.00,-0.5,true,")


def test_read_cohort_file(tmp_path):
    path = tmp_path / "cohort.txt"
    path.write_text("alice\n\nbob\n  carol  \n")
    assert read_cohort_file(path) == {"alice", "bob", "carol"}
