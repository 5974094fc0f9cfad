"""Topic-community retrieval and geospatial prevalence over dump corpora.

The pieces compose as a pipeline: parse and filter NDJSON dump entries,
build a thresholded corpus index, rank communities for a seed query and
grow the query interactively, geolocate authors to US states, and turn the
resulting cohort into per-state and per-division prevalence statistics.
"""

from .entries import (
    COMMENT,
    Entry,
    EntryParseError,
    IngestSummary,
    SENTINEL_AUTHORS,
    SUBMISSION,
    filter_reason,
    iter_entries,
    parse_entry,
)
from .gazetteer import (
    CityRecord,
    Gazetteer,
    STATE_CODES,
    US_STATES,
    resolve_expression,
)
from .geolocate import (
    GeoAssignment,
    census_agreement,
    extract_self_report_candidates,
    flair_assignments,
    flair_state_counts,
    location_subreddit_assignments,
    location_subreddit_counts,
    merge_assignments,
    resolve_self_reports,
    self_report_assignments,
    state_counts,
)
from .index import (
    CorpusIndex,
    CorruptIndexError,
    DocumentModel,
    IndexBuilder,
    Vocabulary,
    build_corpus_index,
    merge_builders,
)
from .ranking import (
    DocScore,
    Query,
    RankingParams,
    TermScore,
    doc_prob,
    doc_score,
    export_topic_vocabulary,
    rank_documents,
    rank_terms,
    term_score,
)
from .session import (
    AWAITING_DECISIONS,
    AWAITING_ITERATION,
    CONVERGED,
    DecisionError,
    ExpansionSession,
    IndexMismatchError,
    IterationRecord,
    SessionStateError,
    allowlist_policy,
    create_session,
    load_session,
    reject_all_policy,
    replay_decisions,
    run_to_convergence,
    save_session,
    session_to_dict,
)
from .stats import (
    DivisionRecord,
    IndicatorSeries,
    PrevalenceDelta,
    PrevalenceRecord,
    StatsReport,
    aggregate_divisions,
    compute_prevalence,
    load_division_map,
    ols_fit,
    pearson,
    regression_report,
    temporal_compare,
)
from .textnorm import load_lemma_table, normalize_text, tokenize

__version__ = "0.1.0"
