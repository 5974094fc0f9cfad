import math

import pytest

from redcohort.ranking import (
    Query,
    RankingParams,
    doc_prob,
    doc_score,
    export_topic_vocabulary,
    rank_documents,
    rank_terms,
    term_score,
    write_ranking_csv,
    write_term_scores_csv,
)

from conftest import make_index, random_corpus
from oracles import brute_doc_score, brute_term_score


# One document uses "ore" 5 times out of 10 words; the corpus has 100 words of
# which 10 are "ore". With alpha=40 the damped in-document rate is 5/50 = 0.1
# and the corpus rate is also 0.1, so both scores reduce to multiples of ln 2.
def hand_index():
    ore_doc = ["ore " * 5 + "slag " * 5]
    filler = ["slag " * 45 + "ore " * 5]
    return make_index({"mine": ore_doc, "dump": filler, "empty_doc": ["slag " * 40]})


def test_doc_prob_hand_value():
    idx = hand_index()
    params = RankingParams(alpha=40.0)
    ore = idx.vocabulary.id_of("ore")
    assert idx.vocabulary.corpus_prob(ore) == pytest.approx(0.1, abs=0)
    assert doc_prob(idx, "mine", ore, params) == pytest.approx(0.2, rel=1e-15)


def test_doc_score_hand_value():
    idx = hand_index()
    params = RankingParams(alpha=40.0)
    q = Query.from_terms(idx, ["ore"])
    # p_d = 0.2, p_C = 0.1 -> 0.2 * ln 2
    assert doc_score(idx, "mine", q, params) == pytest.approx(
        0.2 * math.log(2.0), rel=1e-15
    )


def test_term_score_hand_value():
    idx = hand_index()
    params = RankingParams(alpha=40.0)
    ore = idx.vocabulary.id_of("ore")
    # p_hat = 0.1 over the single doc, prior 0.1 -> ln 2
    assert term_score(idx, ore, ["mine"], params) == pytest.approx(
        math.log(2.0), rel=1e-15
    )


def test_absent_term_probability_is_exactly_prior():
    idx = make_index({"d1": ["x x y"], "d2": ["y y"]})
    params = RankingParams(alpha=7.0)
    x = idx.vocabulary.id_of("x")
    assert doc_prob(idx, "d2", x, params) == idx.vocabulary.corpus_prob(x)


def test_doc_score_zero_without_query_terms():
    idx = make_index({"d1": ["x x"], "d2": ["y y y"]})
    q = Query.from_terms(idx, ["x"])
    assert doc_score(idx, "d2", q, RankingParams()) == 0.0


def test_term_score_zero_when_absent_everywhere():
    idx = make_index({"d1": ["x x"], "d2": ["y y y"], "d3": ["x y"]})
    y = idx.vocabulary.id_of("y")
    assert term_score(idx, y, ["d1"], RankingParams()) == 0.0
    ranked = rank_terms(idx, ["d1"], RankingParams())
    scores = {t.term: t.score for t in ranked}
    assert scores["y"] == 0.0


def test_alpha_zero_degenerate_probability_above_one():
    # All-x document: frequency part is exactly 1 when alpha is 0, so the
    # blended probability exceeds 1. The score must still be finite/positive.
    idx = make_index({"pure": ["x x x x"], "other": ["y y y y y y"]})
    params = RankingParams(alpha=0.0)
    x = idx.vocabulary.id_of("x")
    p = doc_prob(idx, "pure", x, params)
    assert p == pytest.approx(1.0 + 0.4, rel=1e-15)
    s = doc_score(idx, "pure", Query.from_terms(idx, ["x"]), params)
    assert math.isfinite(s) and s > 0


def test_zero_word_doc_with_alpha_zero_scores_zero():
    # Thresholds strip the only term from one doc, leaving total_words == 0;
    # with alpha == 0 the denominator is 0 and the model falls back to the
    # prior for every term.
    idx = make_index({"bare": ["odd"], "rich": ["x x y", "x y y"]}, 1, 2)
    assert idx.document("bare").total_words == 0
    params = RankingParams(alpha=0.0)
    x = idx.vocabulary.id_of("x")
    assert doc_prob(idx, "bare", x, params) == idx.vocabulary.corpus_prob(x)
    assert doc_score(idx, "bare", Query.from_terms(idx, ["x"]), params) == 0.0
    assert term_score(idx, x, ["bare"], params) == 0.0


def test_rank_documents_order_and_ties():
    idx = make_index(
        {"b_mid": ["x y"], "a_mid": ["y x"], "top": ["x x x"], "none": ["y y"]}
    )
    ranked = rank_documents(idx, Query.from_terms(idx, ["x"]), RankingParams(alpha=1.0))
    names = [d.document for d in ranked]
    assert names[0] == "top"
    # identical docs tie -> lexicographic doc id
    assert names[1:3] == ["a_mid", "b_mid"]
    assert names[3] == "none"
    assert ranked[3].score == 0.0


def test_rank_terms_tie_break_lexicographic():
    idx = make_index({"d": ["aa bb aa bb"], "other": ["aa bb cc dd " * 3]})
    ranked = rank_terms(idx, ["d"], RankingParams(alpha=5.0))
    assert ranked[0].score == ranked[1].score
    assert [t.term for t in ranked[:2]] == ["aa", "bb"]


def test_matches_brute_force_oracle(rng):
    for _ in range(25):
        doc_texts, token_counts = random_corpus(rng, max_docs=6, max_terms=15)
        idx = make_index(doc_texts)
        vocab = idx.vocabulary
        if len(vocab) == 0:
            continue
        terms = list(vocab.terms)
        for alpha in (0.0, 1.0, 10_000.0):
            params = RankingParams(alpha=alpha)
            q_terms = terms[: max(1, len(terms) // 2)]
            q = Query.from_terms(idx, q_terms)
            for doc_id in idx.documents:
                got = doc_score(idx, doc_id, q, params)
                want = brute_doc_score(token_counts, doc_id, q_terms, alpha)
                assert got == pytest.approx(want, rel=1e-12, abs=1e-15)
            docs = list(idx.documents)[:3]
            for term in terms:
                got = term_score(idx, vocab.id_of(term), docs, params)
                want = brute_term_score(token_counts, term, docs, alpha)
                assert got == pytest.approx(want, rel=1e-12, abs=1e-15)


def test_rank_documents_agrees_with_doc_score(rng):
    doc_texts, _ = random_corpus(rng, max_docs=8, max_terms=20)
    idx = make_index(doc_texts)
    if len(idx.vocabulary) == 0:
        pytest.skip("degenerate corpus")
    params = RankingParams(alpha=3.0)
    q = Query.from_terms(idx, list(idx.vocabulary.terms)[:2])
    for ds in rank_documents(idx, q, params):
        assert ds.score == pytest.approx(doc_score(idx, ds.document, q, params))


def test_query_validation():
    idx = make_index({"d": ["x y"]})
    with pytest.raises(ValueError, match="duplicate"):
        Query([0, 0])
    with pytest.raises(ValueError):
        Query.from_terms(idx, ["x", "zzz"])
    with pytest.raises(ValueError):
        doc_score(idx, "d", Query([]), RankingParams())
    with pytest.raises(ValueError):
        rank_documents(idx, Query([]), RankingParams())
    with pytest.raises(ValueError):
        term_score(idx, 0, [], RankingParams())
    with pytest.raises(ValueError):
        rank_terms(idx, [], RankingParams())


def test_params_validation():
    with pytest.raises(ValueError):
        RankingParams(alpha=-1.0)
    with pytest.raises(ValueError):
        RankingParams(top_docs=0)
    with pytest.raises(ValueError):
        RankingParams(top_terms=0)
    RankingParams(alpha=0.0)  # zero alpha is legal


def test_export_threshold_is_strict():
    from redcohort.ranking import TermScore

    ranked = [TermScore("hot", 2.5), TermScore("edge", 1.0), TermScore("cold", 0.2)]
    rows = export_topic_vocabulary(ranked, threshold=1.0)
    assert rows == [("hot", 2.5)]


def test_csv_writers_format(tmp_path):
    from redcohort.ranking import DocScore

    idx = make_index({"d1": ["x x"], "d2": ["y"]})
    rank_path = tmp_path / "ranking.csv"
    write_ranking_csv(rank_path, [DocScore("d1", 1.5), DocScore("d2", 0.0)], idx)
    text = rank_path.read_bytes().decode("utf-8")
    assert text.splitlines()[0] == "document,score,total_words"
    assert "\r" not in text
    assert text.endswith("\n")
    rows = text.splitlines()
    assert rows[1].startswith("d1,") and rows[1].endswith(",2")

    term_path = tmp_path / "terms.csv"
    write_term_scores_csv(term_path, [("x", 2.0)])
    assert term_path.read_text().splitlines() == ["term,score", "x,2.0"]
