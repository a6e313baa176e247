import math

import numpy as np
import pytest

from spanparser import lexicon as lex
from spanparser.errors import DataError



def naive_segment(sentence, corpus, threshold, max_len):
    """Independent oracle: direct probability ratios and the delimiter rule."""
    tokens = [t for sent in corpus for t in sent]
    pairs = [p for sent in corpus for p in zip(sent, sent[1:])]
    runs = [[sentence[0]]]
    for a, b in zip(sentence, sentence[1:]):
        if pairs.count((a, b)) == 0:
            pmi = float("-inf")
        else:
            p_ab = pairs.count((a, b)) / len(pairs)
            p_a = tokens.count(a) / len(tokens)
            p_b = tokens.count(b) / len(tokens)
            pmi = math.log(p_ab / (p_a * p_b))
        if pmi < threshold:
            runs.append([b])
        else:
            runs[-1].append(b)
    out = []
    for run in runs:
        for k in range(0, len(run), max_len):
            out.append(tuple(run[k:k + max_len]))
    return out


def random_corpus(rng, sentences=8, vocab=6, max_q=7):
    words = ["w%d" % k for k in range(vocab)]
    return [[words[rng.integers(0, vocab)] for _ in range(rng.integers(1, max_q))]
            for _ in range(sentences)]


def test_pmi_hand_computed_values():
    table = lex.compute_pmi([["a", "b", "a", "b"]])
    assert table.p_unigram("a") == 0.5
    assert table.p_unigram("b") == 0.5
    assert table.bigrams == {("a", "b"): 2, ("b", "a"): 1}
    assert table.total_bigrams == 3
    assert table.pmi("a", "b") == pytest.approx(math.log(8.0 / 3.0), abs=1e-12)
    assert table.pmi("b", "a") == pytest.approx(math.log(4.0 / 3.0), abs=1e-12)
    assert table.pmi("a", "b") == pytest.approx(0.981, abs=1e-3)


def test_pmi_unseen_pair_is_minus_inf():
    table = lex.compute_pmi([["a", "b"], ["c", "d"]])
    assert table.pmi("a", "c") == float("-inf")
    assert table.pmi("b", "a") == float("-inf")


def test_pmi_independence_boundary():
    table = lex.compute_pmi([["a", "a"]])
    assert table.pmi("a", "a") == 0.0


def test_pmi_rejects_empty_corpus():
    with pytest.raises(DataError):
        lex.compute_pmi([])


def test_pmi_probabilities_sum_to_one():
    rng = np.random.default_rng(0)
    table = lex.compute_pmi(random_corpus(rng))
    assert sum(table.p_unigram(w) for w in table.unigrams) == pytest.approx(1.0, abs=1e-9)


# Corpus engineered so the five-token sentence segments as x1 / x2 x3 x4 / x5:
# the inner pairs attract (PMI > 0) and the outer pairs repel (PMI < 0).
PATTERN_SENTENCE = ["x1", "x2", "x3", "x4", "x5"]
PATTERN_CORPUS = ([PATTERN_SENTENCE]
                  + [["x2", "x3", "x4"]] * 2
                  + [["x1", "f"]] * 14 + [["f", "x2"]] * 14
                  + [["x4", "h"]] * 14 + [["h", "x5"]] * 14)


def test_engineered_pattern_pmi_signs():
    table = lex.compute_pmi(PATTERN_CORPUS)
    assert table.pmi("x2", "x3") > 0
    assert table.pmi("x3", "x4") > 0
    assert table.pmi("x1", "x2") < 0
    assert table.pmi("x4", "x5") < 0


def test_segment_worked_pattern():
    table = lex.compute_pmi(PATTERN_CORPUS)
    segments = lex.segment(PATTERN_SENTENCE, table, threshold=0.0)
    assert segments == [("x1",), ("x2", "x3", "x4"), ("x5",)]


def test_segment_all_negative_gives_singletons():
    corpus = [["a", "b"]] + [["a", "z"]] * 9 + [["z", "b"]] * 9
    table = lex.compute_pmi(corpus)
    assert table.pmi("a", "b") < 0
    assert lex.segment(["a", "b"], table, threshold=0.0) == [("a",), ("b",)]


def test_segment_joins_on_positive_pmi():
    table = lex.compute_pmi([["a", "b", "a", "b"]])
    assert lex.segment(["a", "b", "a", "b"], table, 0.0) == [("a", "b", "a", "b")]


def test_segment_threshold_equality_keeps_joined():
    table = lex.compute_pmi([["a", "a"]])
    assert table.pmi("a", "a") == 0.0
    assert lex.segment(["a", "a"], table, threshold=0.0) == [("a", "a")]


def test_segment_chops_overlong_runs():
    table = lex.compute_pmi([["a", "b", "a", "b"]])
    assert lex.segment(["a", "b", "a", "b"], table, 0.0, max_len=3) == \
        [("a", "b", "a"), ("b",)]


def test_segment_partitions_sentence():
    rng = np.random.default_rng(1)
    for _ in range(30):
        corpus = random_corpus(rng)
        table = lex.compute_pmi(corpus)
        for sentence in corpus:
            segments = lex.segment(sentence, table, 0.0, max_len=5)
            flat = [t for seg in segments for t in seg]
            assert flat == sentence


def test_build_lexicon_min_freq_filters_all():
    lexicon = lex.build_lexicon([["a", "b"], ["a", "c"]], n_max=5, min_freq=2)
    assert len(lexicon) == 0


def test_build_lexicon_counts_repeated_segment():
    lexicon = lex.build_lexicon([["x", "y"]] * 3, n_max=5, min_freq=2)
    assert list(lexicon.items()) == [(("x", "y"), 0, 3)]


def test_build_lexicon_single_token():
    lexicon = lex.build_lexicon([["w"]], n_max=5, min_freq=1)
    assert (("w",) in lexicon) and lexicon.freq_of(("w",)) == 1


def test_lexicon_frequencies_match_segment_recount():
    rng = np.random.default_rng(2)
    for _ in range(20):
        corpus = random_corpus(rng, sentences=12)
        lexicon = lex.build_lexicon(corpus, n_max=4, min_freq=2)
        table = lex.compute_pmi(corpus)
        recount = {}
        for sentence in corpus:
            for seg in lex.segment(sentence, table, 0.0, max_len=4):
                recount[seg] = recount.get(seg, 0) + 1
        for ngram, _, freq in lexicon.items():
            assert recount[ngram] == freq
            assert freq >= 2 and 1 <= len(ngram) <= 4


def test_build_matches_naive_oracle():
    rng = np.random.default_rng(3)
    for _ in range(25):
        corpus = random_corpus(rng)
        lexicon = lex.build_lexicon(corpus, n_max=3, min_freq=2)
        counts = {}
        for sentence in corpus:
            for seg in naive_segment(sentence, corpus, 0.0, 3):
                counts[seg] = counts.get(seg, 0) + 1
        expected = {g: c for g, c in counts.items() if c >= 2}
        assert {g: f for g, _, f in lexicon.items()} == expected


def test_lexicon_ids_dense_and_sorted():
    lexicon = lex.build_lexicon([["x", "y"]] * 2 + [["z"], ["z"]], n_max=5, min_freq=2)
    triples = list(lexicon.items())
    assert [t[1] for t in triples] == list(range(len(lexicon)))
    keys = [(len(g), g) for g, _, _ in triples]
    assert keys == sorted(keys)


def test_lexicon_save_load_round_trip(tmp_path):
    lexicon = lex.build_lexicon([["x", "y"]] * 2 + [["z"], ["z"]], n_max=4, min_freq=2)
    path = tmp_path / "lexicon.tsv"
    lexicon.save(path)
    loaded = lex.NGramLexicon.load(path, n_max=4, min_freq=2)
    assert dict(loaded.entries) == dict(lexicon.entries)


def test_candidates_direct_match():
    lexicon = lex.NGramLexicon({("a",): 2, ("b", "c"): 2}, n_max=3, min_freq=2)
    cands = lex.candidates_for_span(["a", "b", "c"], 0, 3, lexicon)
    assert {(lexicon.ngram_of(c.ngram_id), c.start, c.length) for c in cands} == \
        {(("a",), 0, 1), (("b", "c"), 1, 2)}


def test_candidates_nothing_fits():
    lexicon = lex.NGramLexicon({("b", "c"): 2}, n_max=3, min_freq=2)
    assert lex.candidates_for_span(["a", "b", "c"], 0, 1, lexicon) == []


def test_candidates_match_exhaustive_enumeration():
    rng = np.random.default_rng(4)
    for _ in range(200):
        corpus = random_corpus(rng, sentences=6, vocab=4)
        lexicon = lex.build_lexicon(corpus, n_max=3, min_freq=1)
        sentence = corpus[rng.integers(0, len(corpus))]
        q = len(sentence)
        i = int(rng.integers(0, q))
        j = int(rng.integers(i + 1, q + 1))
        got = {(c.ngram_id, c.start, c.length)
               for c in lex.candidates_for_span(sentence, i, j, lexicon)}
        want = set()
        for ngram, ngram_id, _ in lexicon.items():
            for start in range(i, j - len(ngram) + 1):
                if tuple(sentence[start:start + len(ngram)]) == ngram:
                    want.add((ngram_id, start, len(ngram)))
        assert got == want


def test_candidates_monotone_under_span_inclusion():
    rng = np.random.default_rng(5)
    corpus = random_corpus(rng, sentences=10, vocab=4)
    lexicon = lex.build_lexicon(corpus, n_max=3, min_freq=1)
    sentence = corpus[0]
    q = len(sentence)
    inner = {(c.ngram_id, c.start, c.length)
             for c in lex.candidates_for_span(sentence, 0, max(1, q - 1), lexicon)}
    outer = {(c.ngram_id, c.start, c.length)
             for c in lex.candidates_for_span(sentence, 0, q, lexicon)}
    assert inner <= outer


def test_max_len_filter():
    counts = {("a",): 3, ("a", "b"): 2, ("a", "b", "c"): 2}
    lexicon = lex.NGramLexicon(counts, n_max=3, min_freq=2)
    same = lex.max_len_filter(lexicon, 3)
    assert dict(same.entries) == dict(lexicon.entries)
    unigrams = lex.max_len_filter(lexicon, 1)
    assert list(unigrams.entries) == [("a",)]
    pairs = lex.max_len_filter(lexicon, 2)
    assert set(pairs.entries) == {("a",), ("a", "b")}
    assert [pairs.id_of(g) for g in sorted(pairs.entries, key=lambda g: (len(g), g))] == [0, 1]
    with pytest.raises(DataError):
        lex.max_len_filter(lexicon, 4)
