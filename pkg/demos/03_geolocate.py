"""Assign authors to US states from three noisy signals.

Shows the staged place-name resolution ("Newark, CA" beats bare "Newark"),
the self-report window, flair and home-community tallies, and the merge
rule that puts an explicit self-report above everything else. Run from the
repository root:

    python3 demos/03_geolocate.py
"""

from importlib import resources

from redcohort.entries import Entry
from redcohort.gazetteer import Gazetteer
from redcohort.geolocate import (
    extract_self_report_candidates,
    flair_state_counts,
    location_subreddit_counts,
    merge_assignments,
    resolve_self_reports,
    self_report_assignments,
    state_counts,
)


def entry(author, text, subreddit="general", flair=None, serial=[0]):
    serial[0] += 1
    return Entry(f"d{serial[0]}", author, subreddit, serial[0], text, "comment",
                 flair_text=flair)


def main() -> None:
    gaz = Gazetteer.from_tsv_text(
        (resources.files("redcohort") / "data" / "gazetteer_sample.tsv")
        .read_text(encoding="utf-8")
    )

    print("staged resolution, most specific reading first:")
    for expression in ["Newark, CA", "Newark", "Houston", "Arlington",
                       "the Big Apple", "washington dc", "west virginia"]:
        print(f"  {expression!r:18} -> {gaz.resolve(expression)}")

    stream = [
        entry("ana", "I live in Denver. Great trails here."),
        entry("ana", "I live in Denver."),                       # consistent repeat
        entry("bo", "I live in Boston."),
        entry("bo", "I live in Houston."),                       # conflict: dropped
        entry("cy", "game day!", "CollegeFootball", flair="Texas Longhorns"),
        entry("cy", "kickoff", "CollegeFootball", flair="Texas Longhorns"),
        entry("dee", "hello", "Seattle"),
        entry("dee", "nice market", "Seattle"),
        entry("dee", "visiting", "denver"),                      # 2-1 majority
        entry("eli", "I live in nola.", ),                       # self-report wins...
        entry("eli", "hi", "Seattle"),                           # ...over community
    ]
    flair_map = {("collegefootball", "Texas Longhorns"): "TX"}
    location_map = {"seattle": "WA", "denver": "CO"}

    reports = extract_self_report_candidates(stream)
    print(f"\nself-report phrases found: {reports}")
    merged = merge_assignments(
        self_report_assignments(resolve_self_reports(reports, gaz)),
        flair_state_counts(stream, flair_map),
        location_subreddit_counts(stream, location_map),
    )

    print("\nfinal assignments (one line per kept author):")
    for author, a in sorted(merged.items()):
        print(f"  {author:4s} -> {a.state}  (evidence counts {dict(a.counts)})")
    print("dropped: authors with conflicting or tied evidence "
          f"({sorted(set(e.author for e in stream) - set(merged))})")

    print(f"\nauthors per state: {state_counts(merged)}")


if __name__ == "__main__":
    main()
