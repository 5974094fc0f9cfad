"""Command-line pipeline: ingest, expand, geolocate, prevalence."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .entries import IngestSummary, iter_entries
from .geolocate import (
    census_agreement,
    extract_self_report_candidates,
    flair_assignments,
    flair_state_counts,
    load_census_csv,
    load_flair_map,
    load_location_map,
    location_subreddit_assignments,
    location_subreddit_counts,
    merge_assignments,
    read_assignments_csv,
    resolve_self_reports,
    self_report_assignments,
    state_counts,
    write_assignments_csv,
    write_state_counts_csv,
)
from .gazetteer import Gazetteer
from .index import CorpusIndex, IndexBuilder, merge_builders
from .ranking import (
    Query,
    RankingParams,
    export_topic_vocabulary,
    rank_documents,
    rank_terms,
    write_ranking_csv,
    write_term_scores_csv,
)
from .session import (
    CONVERGED,
    allowlist_policy,
    create_session,
    run_to_convergence,
    save_session,
    load_session,
)
from .stats import (
    IndicatorSeries,
    aggregate_divisions,
    compute_prevalence,
    load_division_map,
    read_cohort_file,
    read_prevalence_csv,
    regression_report,
    temporal_compare,
    write_delta_csv,
    write_division_csv,
    write_prevalence_csv,
)
from .textnorm import load_lemma_table

log = logging.getLogger("redcohort")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

CONFIG_ENV_VAR = "REDCOHORT_CONFIG"

DEFAULT_MIN_ENTRIES = 100
DEFAULT_MIN_TERM_COUNT = 100
DEFAULT_ALPHA = 10_000.0
DEFAULT_TOP_DOCS = 10
DEFAULT_TOP_TERMS = 20
DEFAULT_VOCAB_THRESHOLD = 1.0


class DataError(RuntimeError):
    """Bad or missing input data; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract says 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class PipelineConfig:
    """Resolved knobs for one invocation: flag > config file > default."""

    values: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "PipelineConfig":
        path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
        values: dict = {}
        if path:
            try:
                loaded = json.loads(Path(path).read_text(encoding="utf-8"))
            except FileNotFoundError:
                raise DataError(f"config file not found: {path}")
            except json.JSONDecodeError as exc:
                raise DataError(f"config file {path} is not valid JSON: {exc}")
            if not isinstance(loaded, dict):
                raise DataError(f"config file {path} must hold a JSON object")
            values = loaded
        return cls(values)

    def get(self, args: argparse.Namespace, name: str, default):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        if name in self.values:
            return self.values[name]
        return default

    def params(self, args: argparse.Namespace) -> RankingParams:
        return RankingParams(
            alpha=float(self.get(args, "alpha", DEFAULT_ALPHA)),
            top_docs=int(self.get(args, "top_docs", DEFAULT_TOP_DOCS)),
            top_terms=int(self.get(args, "top_terms", DEFAULT_TOP_TERMS)),
        )

    def window(self, args: argparse.Namespace):
        start = self.get(args, "window_start", None)
        end = self.get(args, "window_end", None)
        if start is None and end is None:
            return None
        return (
            int(start) if start is not None else None,
            int(end) if end is not None else None,
        )


def _require_files(paths) -> list[Path]:
    out = []
    for p in paths:
        path = Path(p)
        if not path.is_file():
            raise DataError(f"input file not found: {path}")
        out.append(path)
    return out


def _out_dir(config: PipelineConfig, args) -> Path:
    out = Path(config.get(args, "out_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- ingest ----------------------------------------------------------------


def _ingest_shard(path: str, window, lemma_table) -> tuple:
    # top-level so ProcessPoolExecutor can pickle it
    builder = IndexBuilder(lemma_table)
    summary = IngestSummary()
    for entry in iter_entries([path], window=window, summary=summary):
        builder.add(entry)
    return builder, summary


def cmd_ingest(args: argparse.Namespace, config: PipelineConfig) -> int:
    inputs = _require_files(args.inputs)
    window = config.window(args)
    lemma_table = {}
    lemma_path = config.get(args, "lemma_table", None)
    if lemma_path:
        if not Path(lemma_path).is_file():
            raise DataError(f"lemma table not found: {lemma_path}")
        lemma_table = load_lemma_table(lemma_path)
    min_entries = int(config.get(args, "min_entries", DEFAULT_MIN_ENTRIES))
    min_term_count = int(config.get(args, "min_term_count", DEFAULT_MIN_TERM_COUNT))
    workers = int(config.get(args, "workers", 1))

    summary = IngestSummary()
    if workers > 1 and len(inputs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            shards = list(
                pool.map(
                    _ingest_shard,
                    [str(p) for p in inputs],
                    [window] * len(inputs),
                    [lemma_table] * len(inputs),
                )
            )
        builders = []
        for shard_builder, shard_summary in shards:
            builders.append(shard_builder)
            summary.merge(shard_summary)
        builder = merge_builders(builders)
    else:
        builder = IndexBuilder(lemma_table)
        for entry in iter_entries(inputs, window=window, summary=summary):
            builder.add(entry)

    if summary.indexed == 0:
        log.warning("no entries survived parsing and filtering; cache is empty")
    index = builder.finalize(min_entries, min_term_count)
    index.save(args.index_out)
    if args.summary:
        Path(args.summary).write_text(
            json.dumps(summary.as_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    print(
        f"indexed {summary.indexed} of {summary.lines} lines -> "
        f"{len(index.documents)} documents, {len(index.vocabulary)} terms "
        f"({args.index_out})"
    )
    print(f"fingerprint: {index.fingerprint()}")
    return EXIT_OK


# -- expand ----------------------------------------------------------------


def _load_index(path) -> CorpusIndex:
    if not Path(path).is_file():
        raise DataError(f"index cache not found: {path}")
    try:
        return CorpusIndex.load(path)
    except ValueError as exc:
        raise DataError(f"cannot read index cache {path}: {exc}")


def _read_allowlist(path) -> set:
    if not Path(path).is_file():
        raise DataError(f"policy file not found: {path}")
    allowed = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        term = line.strip()
        if term and not term.startswith("#"):
            allowed.add(term)
    return allowed


def _write_expansion_outputs(session, out_dir: Path, vocab_threshold: float) -> None:
    save_session(session, out_dir / "session.json")
    index = session.index
    query = Query(index.vocabulary.resolve(session.query))
    full_ranking = rank_documents(index, query, session.params)
    write_ranking_csv(out_dir / "ranking.csv", full_ranking, index)
    if session.relevant:
        term_ranking = rank_terms(index, session.relevant, session.params)
        write_term_scores_csv(
            out_dir / "vocabulary.csv",
            export_topic_vocabulary(term_ranking, vocab_threshold),
        )


def cmd_expand(args: argparse.Namespace, config: PipelineConfig) -> int:
    index = _load_index(args.index)
    params = config.params(args)
    seeds = args.seed or config.values.get("seed") or []
    if not seeds:
        raise DataError("no seed terms given (--seed)")
    try:
        session = create_session(index, seeds, params)
    except ValueError as exc:
        raise DataError(str(exc))
    vocab_threshold = float(
        config.get(args, "vocab_threshold", DEFAULT_VOCAB_THRESHOLD)
    )
    out_dir = _out_dir(config, args)

    if args.policy:
        allowed = _read_allowlist(args.policy)
        run_to_convergence(
            session, allowlist_policy(allowed), decided_by="policy:allowlist"
        )
        _write_expansion_outputs(session, out_dir, vocab_threshold)
        print(
            f"converged after {session.iteration} iterations; "
            f"query has {len(session.query)} terms"
        )
        print(f"outputs in {out_dir}")
        return EXIT_OK

    # --serve: run the first iteration so the panel has something to show,
    # then hand the session over and wait
    from .api import SessionServer  # deferred: not needed for batch runs

    ui_dir = config.get(args, "ui_dir", None)
    if ui_dir is not None and not Path(ui_dir).is_dir():
        raise DataError(f"ui directory not found: {ui_dir}")
    session.run_iteration()
    server = SessionServer(session, port=args.serve, ui_dir=ui_dir)
    server.start()
    print(f"serving review session at http://127.0.0.1:{server.port}/", flush=True)
    try:
        server.converged.wait()
    except KeyboardInterrupt:
        print("interrupted; saving session as-is", file=sys.stderr)
    finally:
        server.shutdown()
    _write_expansion_outputs(session, out_dir, vocab_threshold)
    status = "converged" if session.status == CONVERGED else session.status
    print(f"session {status} after {session.iteration} iterations; outputs in {out_dir}")
    return EXIT_OK


# -- geolocate -------------------------------------------------------------


def cmd_geolocate(args: argparse.Namespace, config: PipelineConfig) -> int:
    inputs = _require_files(args.inputs)
    gazetteer_path = config.get(args, "gazetteer", None)
    if not gazetteer_path:
        raise DataError("a gazetteer file is required (--gazetteer)")
    if not Path(gazetteer_path).is_file():
        raise DataError(f"gazetteer file not found: {gazetteer_path}")
    gazetteer = Gazetteer.load(gazetteer_path)

    location_map = {}
    locmap_path = config.get(args, "locmap", None)
    if locmap_path:
        if not Path(locmap_path).is_file():
            raise DataError(f"location map not found: {locmap_path}")
        location_map = load_location_map(locmap_path)
    flair_map = {}
    flair_path = config.get(args, "flair_map", None)
    if flair_path:
        if not Path(flair_path).is_file():
            raise DataError(f"flair map not found: {flair_path}")
        flair_map = load_flair_map(flair_path)

    window = config.window(args)
    entries = list(iter_entries(inputs, window=window))

    candidates = extract_self_report_candidates(entries)
    resolved = resolve_self_reports(candidates, gazetteer)
    selfrep = self_report_assignments(resolved)
    fl_counts = flair_state_counts(entries, flair_map)
    ls_counts = location_subreddit_counts(entries, location_map)
    per_source = {
        "self_report": selfrep,
        "flair": flair_assignments(entries, flair_map),
        "location_subreddit": location_subreddit_assignments(entries, location_map),
    }
    merged = merge_assignments(selfrep, fl_counts, ls_counts)

    out_dir = _out_dir(config, args)
    write_assignments_csv(out_dir / "assignments.csv", merged)
    write_state_counts_csv(out_dir / "state_counts.csv", state_counts(merged))

    summary: dict = {
        "entries": len(entries),
        "self_report_candidates": len(candidates),
        "self_report_resolved": len(resolved),
        "yield": {name: len(assignments) for name, assignments in per_source.items()},
        "merged": len(merged),
    }
    census_path = config.get(args, "census", None)
    if census_path:
        if not Path(census_path).is_file():
            raise DataError(f"census file not found: {census_path}")
        census = load_census_csv(census_path)
        agreement = {}
        for name, assignments in {**per_source, "merged": merged}.items():
            try:
                _, r, p = census_agreement(assignments, census)
                agreement[name] = {"r": r, "p_value": p}
            except ValueError as exc:
                agreement[name] = {"error": str(exc)}
        summary["census_agreement"] = agreement
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(
        f"geolocated {len(merged)} authors "
        f"(self-report {summary['yield']['self_report']}, "
        f"flair {summary['yield']['flair']}, "
        f"location-subreddit {summary['yield']['location_subreddit']}); "
        f"outputs in {out_dir}"
    )
    return EXIT_OK


# -- prevalence ------------------------------------------------------------


def _cohort_authors(args, config: PipelineConfig, index: CorpusIndex) -> set:
    picks = [
        bool(args.cohort_docs),
        bool(args.cohort_file),
        bool(args.session),
    ]
    if sum(picks) != 1:
        raise DataError(
            "exactly one cohort source is required: "
            "--cohort-docs, --cohort-file, or --session"
        )
    if args.cohort_docs:
        docs = [d.strip() for d in args.cohort_docs.split(",") if d.strip()]
        try:
            return index.author_set(docs)
        except KeyError as exc:
            raise DataError(str(exc))
    if args.cohort_file:
        if not Path(args.cohort_file).is_file():
            raise DataError(f"cohort file not found: {args.cohort_file}")
        return read_cohort_file(args.cohort_file)
    if not Path(args.session).is_file():
        raise DataError(f"session file not found: {args.session}")
    try:
        session = load_session(args.session, index)
    except ValueError as exc:
        raise DataError(str(exc))
    if session.status != CONVERGED:
        log.warning("session has not converged; using its current relevant set")
    if not session.relevant:
        raise DataError("session has no relevant documents to take authors from")
    return index.author_set(session.relevant)


def cmd_prevalence(args: argparse.Namespace, config: PipelineConfig) -> int:
    index = _load_index(args.index)
    if not Path(args.geo).is_file():
        raise DataError(f"geolocation table not found: {args.geo}")
    geolocated = read_assignments_csv(args.geo)
    cohort = _cohort_authors(args, config, index)
    overlap = cohort & set(geolocated)
    if not overlap:
        raise DataError(
            f"none of the {len(cohort)} cohort authors appear among the "
            f"{len(geolocated)} geolocated authors; nothing to measure"
        )

    records = compute_prevalence(cohort, geolocated)
    division_map = load_division_map(config.get(args, "division_map", None))
    try:
        divisions = aggregate_divisions(records, division_map)
    except KeyError as exc:
        raise DataError(str(exc))

    out_dir = _out_dir(config, args)
    write_prevalence_csv(out_dir / "prevalence.csv", records)
    write_division_csv(out_dir / "divisions.csv", divisions)
    outputs = ["prevalence.csv", "divisions.csv"]

    indicator_paths = [args.overdose, args.prescribing]
    if any(indicator_paths) and not all(indicator_paths):
        raise DataError("indicator regression needs both --overdose and --prescribing")
    if all(indicator_paths):
        series = []
        for path, name in zip(indicator_paths, ("overdose", "prescribing")):
            if not Path(path).is_file():
                raise DataError(f"indicator file not found: {path}")
            series.append(IndicatorSeries.from_csv(path, name))
        log_transform = bool(config.get(args, "log_transform", False))
        try:
            report = regression_report(records, series, log_transform=log_transform)
        except ValueError as exc:
            raise DataError(str(exc))
        report.write_json(out_dir / "stats.json")
        outputs.append("stats.json")
        for label, (r, p) in report.correlations.items():
            print(f"{label}: r={r:.4f} p={p:.3g}")

    if args.compare_with:
        if not Path(args.compare_with).is_file():
            raise DataError(f"comparison table not found: {args.compare_with}")
        earlier = read_prevalence_csv(args.compare_with)
        deltas = temporal_compare(earlier, records)
        write_delta_csv(out_dir / "delta.csv", deltas)
        outputs.append("delta.csv")

    print(
        f"prevalence over {len(records)} states "
        f"({len(overlap)} cohort authors geolocated); wrote "
        + ", ".join(outputs)
        + f" in {out_dir}"
    )
    return EXIT_OK


# -- wiring ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="redcohort",
        description=(
            "Corpus indexing, query-driven community retrieval, author "
            "geolocation, and per-state prevalence statistics."
        ),
    )
    parser.add_argument(
        "--config",
        help=f"JSON config file (default: ${CONFIG_ENV_VAR} if set)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="build a corpus index cache")
    p_ingest.add_argument("inputs", nargs="+", help="NDJSON dump files (.gz ok)")
    p_ingest.add_argument("--index-out", required=True, help="cache file to write")
    p_ingest.add_argument("--lemma-table", help="TSV token->lemma table")
    p_ingest.add_argument("--min-entries", type=int, help="document entry threshold")
    p_ingest.add_argument("--min-term-count", type=int, help="corpus term threshold")
    p_ingest.add_argument("--window-start", type=int, help="epoch seconds, inclusive")
    p_ingest.add_argument("--window-end", type=int, help="epoch seconds, exclusive")
    p_ingest.add_argument("--summary", help="write ingest tallies JSON here")
    p_ingest.add_argument("--workers", type=int, help="parallel shard count")

    p_expand = sub.add_parser(
        "expand", help="run an interactive or policy-driven expansion session"
    )
    p_expand.add_argument("--index", required=True, help="index cache file")
    p_expand.add_argument(
        "--seed", action="append", help="seed query term (repeatable)"
    )
    p_expand.add_argument("--alpha", type=float, help="smoothing constant")
    p_expand.add_argument("--top-docs", type=int, help="relevant set size")
    p_expand.add_argument("--top-terms", type=int, help="candidate list size")
    p_expand.add_argument(
        "--vocab-threshold", type=float, help="topic vocabulary score cutoff"
    )
    p_expand.add_argument("--out-dir", help="output directory (default ./out)")
    mode = p_expand.add_mutually_exclusive_group(required=True)
    mode.add_argument("--policy", help="allowlist file: accept these terms, reject rest")
    mode.add_argument(
        "--serve", type=int, help="serve the review API/UI on this port (0 = ephemeral)"
    )
    p_expand.add_argument("--ui-dir", help="static review panel files to serve")

    p_geo = sub.add_parser("geolocate", help="assign authors to US states")
    p_geo.add_argument("inputs", nargs="+", help="NDJSON dump files (.gz ok)")
    p_geo.add_argument("--gazetteer", help="TSV city gazetteer (required)")
    p_geo.add_argument("--locmap", help="CSV subreddit,state_code")
    p_geo.add_argument("--flair-map", help="CSV subreddit,flair_text,state_code")
    p_geo.add_argument("--census", help="CSV state_code,population")
    p_geo.add_argument("--window-start", type=int)
    p_geo.add_argument("--window-end", type=int)
    p_geo.add_argument("--out-dir", help="output directory (default ./out)")

    p_prev = sub.add_parser(
        "prevalence", help="per-state and per-division cohort prevalence"
    )
    p_prev.add_argument("--index", required=True, help="index cache file")
    p_prev.add_argument("--geo", required=True, help="assignments CSV")
    p_prev.add_argument(
        "--cohort-docs", help="comma-separated document ids; cohort = their authors"
    )
    p_prev.add_argument("--cohort-file", help="file with one author per line")
    p_prev.add_argument("--session", help="converged session file; cohort = its authors")
    p_prev.add_argument("--overdose", help="indicator CSV state_code,value")
    p_prev.add_argument("--prescribing", help="indicator CSV state_code,value")
    p_prev.add_argument("--division-map", help="CSV state_code,region,division")
    p_prev.add_argument(
        "--log-transform",
        action="store_const",
        const=True,
        help="correlate and regress on log values",
    )
    p_prev.add_argument(
        "--compare-with", help="earlier prevalence.csv for temporal deltas"
    )
    p_prev.add_argument("--out-dir", help="output directory (default ./out)")

    return parser


_COMMANDS = {
    "ingest": cmd_ingest,
    "expand": cmd_expand,
    "geolocate": cmd_geolocate,
    "prevalence": cmd_prevalence,
}


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = PipelineConfig.from_args(args)
        return _COMMANDS[args.command](args, config)
    except DataError as exc:
        print(f"redcohort: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"redcohort: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
