"""Tests for the reference co-occurrence index and the coherence measures."""

import math
from itertools import combinations

import numpy as np
import pytest

from models import MEASURES, TokenizerConfig, TopicModel
from services.coherence import (
    CoherenceIndex,
    build_index,
    build_index_sharded,
    c_a,
    c_npmi_topic,
    c_p,
    c_uci,
    c_umass,
    c_v,
    context_vectors,
    evaluate_model,
    fitelson,
    needed_terms,
    npmi_pair,
    read_reference_corpus,
    topic_top_terms,
    umass_with_diagnostics,
)
from services.thread_parser import Tokenizer

TERMS = ["a", "b", "c", "d", "e"]


def docs_of(*texts):
    return [text.split() for text in texts]


def index_of(docs, terms=TERMS, window_sizes=(5, 10, 70, 110)):
    return build_index(docs, terms, window_sizes)


def oracle_window_counts(docs, terms, size):
    """Enumerate every stride-1 window and count term sets directly."""
    counts = {}
    total = 0
    for doc in docs:
        for start in range(max(1, len(doc))):
            total += 1
            present = set(doc[start:start + size]) & set(terms)
            for a in present:
                for b in present:
                    counts[(a, b)] = counts.get((a, b), 0) + 1
    return counts, total


def oracle_probability(docs, size, epsilon=1e-12):
    """Smoothed share of stride-1 windows holding every given term, by direct enumeration."""
    windows = [set(doc[start:start + size]) for doc in docs for start in range(max(1, len(doc)))]

    def count(*terms):
        return sum(1 for window in windows if all(term in window for term in terms))

    def probability(*terms):
        return (count(*terms) + epsilon) / (len(windows) + epsilon)

    return probability, count, len(windows)


def oracle_npmi(probability, a, b):
    joint = probability(a, b)
    if joint >= 1.0:
        return 1.0
    value = math.log(joint / (probability(a) * probability(b))) / -math.log(joint)
    return min(1.0, max(-1.0, value))


def oracle_cosine(u, v):
    norm = math.sqrt(sum(x * x for x in u)) * math.sqrt(sum(x * x for x in v))
    return sum(x * y for x, y in zip(u, v)) / norm if norm else 0.0


def oracle_context_vectors(docs, terms, size):
    probability, _, _ = oracle_probability(docs, size)
    return [[oracle_npmi(probability, a, b) for b in terms] for a in terms]


class TestCoherenceIndex:

    def test_two_token_document(self):
        index = index_of(docs_of("a b"))
        assert index.n_windows(10) == 2
        assert index.window_frequency("a", 10) == 1
        assert index.window_frequency("b", 10) == 2
        assert index.window_cofrequency("a", "b", 10) == 1
        assert index.doc_frequency("a") == 1
        assert index.n_documents == 1

    def test_empty_document_counts_one_window(self):
        index = index_of([[], ["a"]])
        assert index.n_windows(5) == 2
        assert index.n_documents == 2

    def test_matches_window_enumeration(self):
        rng = np.random.default_rng(99)
        alphabet = TERMS + ["x", "y"]
        docs = [[alphabet[int(i)] for i in rng.integers(0, len(alphabet), size=int(rng.integers(0, 160)))]
                for _ in range(40)]
        index = index_of(docs)
        for size in (5, 10, 70, 110):
            expected, total = oracle_window_counts(docs, TERMS, size)
            assert index.n_windows(size) == total
            for a in TERMS:
                for b in TERMS:
                    assert index.window_cofrequency(a, b, size) == expected.get((a, b), 0), (a, b, size)

    def test_document_counts_are_boolean(self):
        index = index_of(docs_of("a a a b", "a", "c"))
        assert index.doc_frequency("a") == 2
        assert index.doc_cofrequency("a", "b") == 1
        assert index.doc_frequency("e") == 0

    def test_unknown_term(self):
        with pytest.raises(KeyError, match="zzz"):
            index_of(docs_of("a b")).doc_frequency("zzz")

    def test_unknown_window(self):
        with pytest.raises(ValueError):
            index_of(docs_of("a b")).n_windows(3)

    def test_invalid_window_size(self):
        with pytest.raises(ValueError):
            CoherenceIndex(TERMS, window_sizes=(0, 10))

    def test_empty_reference_corpus(self):
        with pytest.raises(ValueError, match="empty"):
            build_index([], TERMS)

    def test_merge_equals_concatenation(self):
        first, second = docs_of("a b c", "d e a b"), docs_of("c c a", "e")
        merged = index_of(first).merge(index_of(second))
        whole = index_of(first + second)
        assert merged.n_documents == whole.n_documents
        np.testing.assert_array_equal(merged.document_counts, whole.document_counts)
        for size in whole.window_sizes:
            assert merged.n_windows(size) == whole.n_windows(size)
            np.testing.assert_array_equal(merged.window_counts[size], whole.window_counts[size])

    def test_merge_rejects_other_terms(self):
        with pytest.raises(ValueError):
            index_of(docs_of("a")).merge(index_of(docs_of("a"), terms=["a"]))

    def test_sharded_build(self):
        shards = [docs_of("a b c", "b c"), docs_of("d a"), docs_of("e e e", "a e")]
        sharded = build_index_sharded(shards, TERMS, max_workers=3)
        whole = index_of([doc for shard in shards for doc in shard])
        np.testing.assert_array_equal(sharded.document_counts, whole.document_counts)
        np.testing.assert_array_equal(sharded.window_counts[10], whole.window_counts[10])

    def test_read_reference_corpus_skips_blank_lines(self, tmp_path):
        path = tmp_path / "reference.txt"
        path.write_text("a b c\n\n   \nd e\n", encoding="utf-8")
        docs = list(read_reference_corpus(path, Tokenizer(TokenizerConfig(min_len=1))))
        assert docs == [["a", "b", "c"], ["d", "e"]]


class TestNpmi:

    def test_toy_value(self):
        index = index_of(docs_of("a b", "b a"))
        assert index.probability("a", 10) == pytest.approx(0.75)
        assert index.joint_probability("a", "b", 10) == pytest.approx(0.5)
        expected = math.log(0.5 / 0.5625) / -math.log(0.5)
        assert npmi_pair("a", "b", index) == pytest.approx(expected, abs=1e-9)
        assert npmi_pair("a", "b", index) == pytest.approx(-0.170, abs=1e-3)

    def test_independent_terms_score_zero(self):
        index = index_of(docs_of("a b", "a", "c"))
        assert npmi_pair("a", "b", index) == pytest.approx(0.0, abs=1e-9)

    def test_self_pair_scores_one(self):
        index = index_of(docs_of("a b", "c a"))
        assert npmi_pair("a", "a", index) == pytest.approx(1.0, abs=1e-9)

    def test_term_in_every_window(self):
        assert npmi_pair("a", "a", index_of(docs_of("a", "a"))) == 1.0

    def test_never_together_is_bounded(self):
        value = npmi_pair("a", "b", index_of(docs_of("a", "b")))
        assert -1.0 <= value < -0.9

    def test_topic_average(self):
        index = index_of(docs_of("a b c", "c a", "b"))
        terms = ["a", "b", "c"]
        pairs = [npmi_pair(x, y, index) for x, y in combinations(terms, 2)]
        assert c_npmi_topic(terms, index) == pytest.approx(sum(pairs) / 3)

    def test_uci_uses_plain_pmi(self):
        index = index_of(docs_of("a b", "b a"))
        assert c_uci(["a", "b"], index) == pytest.approx(math.log(0.5 / 0.5625), abs=1e-9)


class TestUmass:

    def test_conditional_is_one(self):
        index = index_of(docs_of("a b", "a", "b", "a b"))
        assert c_umass(["a", "b"], index) == pytest.approx(0.0, abs=1e-12)

    def test_disjoint_terms(self):
        index = index_of(docs_of("a", "a", "a", "a", "b"))
        assert c_umass(["a", "b"], index) == pytest.approx(math.log(1 / 4))

    def test_absent_preceding_word_is_skipped(self):
        index = index_of(docs_of("a b"))
        value, skipped = umass_with_diagnostics(["e", "a", "b"], index)
        assert skipped == 2
        assert value == pytest.approx(2.0 * math.log(2.0 / 1.0) / 6.0)


class TestVectorMeasures:

    def test_identical_vectors_score_one(self):
        index = index_of(docs_of("a b", "c"))
        assert c_v(["a", "a"], index) == pytest.approx(1.0)
        assert c_a(["a", "a"], index) == pytest.approx(1.0)

    def test_context_vectors_are_symmetric(self):
        index = index_of(docs_of("a b c d", "b d e", "a e"))
        vectors = context_vectors(["a", "b", "c", "d"], index, 110)
        np.testing.assert_allclose(vectors, vectors.T)

    def test_bounded(self):
        rng = np.random.default_rng(4)
        docs = [[TERMS[int(i)] for i in rng.integers(0, 5, size=int(rng.integers(1, 30)))] for _ in range(25)]
        index = index_of(docs)
        for measure in (c_v, c_a, c_p, c_npmi_topic):
            assert -1.0 - 1e-9 <= measure(TERMS, index) <= 1.0 + 1e-9

    def test_word_missing_from_reference_stays_finite(self):
        index = index_of(docs_of("a b c", "b c d", "a d"))
        for measure in (c_v, c_a, c_p):
            assert math.isfinite(measure(["a", "e", "b"], index))


class TestAgainstDirectCounts:
    """Vector and confirmation measures recomputed from enumerated windows."""

    TOP = ["a", "b", "c", "d"]

    @pytest.fixture(scope="class")
    def docs(self):
        rng = np.random.default_rng(21)
        alphabet = self.TOP + ["x", "y"]
        docs = [[alphabet[int(i)] for i in rng.integers(0, len(alphabet), size=int(rng.integers(6, 17)))] + ["x"]
                for _ in range(5)]
        # every top word occurs, none occurs in every window
        docs[0] = self.TOP + docs[0]
        return docs

    def test_c_v(self, docs):
        vectors = oracle_context_vectors(docs, self.TOP, 110)
        whole = [sum(column) for column in zip(*vectors)]
        expected = sum(oracle_cosine(v, whole) for v in vectors) / len(vectors)
        assert c_v(self.TOP, index_of(docs)) == pytest.approx(expected, abs=1e-9)

    def test_c_a(self, docs):
        vectors = oracle_context_vectors(docs, self.TOP, 5)
        pairs = [oracle_cosine(vectors[i], vectors[j])
                 for i in range(len(vectors)) for j in range(len(vectors)) if i != j]
        assert c_a(self.TOP, index_of(docs)) == pytest.approx(sum(pairs) / len(pairs), abs=1e-9)

    def test_c_p(self, docs):
        _, count, n = oracle_probability(docs, 70)
        eps = 1e-12
        values = []
        for prev, word in zip(self.TOP, self.TOP[1:]):
            given = (count(word, prev) + eps) / (count(prev) + eps)
            given_not = (count(word) - count(word, prev) + eps) / (n - count(prev) + eps)
            values.append((given - given_not) / (given + given_not))
        assert c_p(self.TOP, index_of(docs)) == pytest.approx(sum(values) / len(values), abs=1e-9)


class TestFitelson:

    def test_confirmation_limit(self):
        index = index_of(docs_of("a b", "c"))
        assert fitelson("a", "b", index) == pytest.approx(1.0, abs=1e-9)

    def test_disconfirmation_limit(self):
        index = index_of(docs_of("a", "b"))
        assert fitelson("a", "b", index) == pytest.approx(-1.0, abs=1e-9)
        assert c_p(["b", "a"], index) == pytest.approx(-1.0, abs=1e-9)

    def test_absent_preceding_word(self):
        index = index_of(docs_of("a", "b"))
        assert fitelson("a", "e", index) == pytest.approx(-1.0, abs=1e-9)


class TestTopicSizes:

    @pytest.mark.parametrize("measure", [c_v, c_p, c_uci, c_npmi_topic, c_a])
    def test_fewer_than_two_words(self, measure):
        with pytest.raises(ValueError):
            measure(["a"], index_of(docs_of("a b")))

    def test_umass_fewer_than_two_words(self):
        with pytest.raises(ValueError):
            c_umass([], index_of(docs_of("a b")))


class TestEvaluateModel:

    def test_single_topic(self):
        model = TopicModel(phi=np.array([[0.2, 0.5, 0.3]]), theta=np.ones((1, 1)), terms=["a", "b", "c"])
        assert topic_top_terms(model, T=10) == [["b", "c", "a"]]
        index = index_of(docs_of("a b c", "b c"), terms=needed_terms(model))
        report = evaluate_model(model, index)
        assert len(report.rows) == 1
        assert set(report.rows[0]) == set(MEASURES)
        assert report.averages == report.rows[0]
        assert report.top_words == [["b", "c", "a"]]

    def test_ties_break_to_lower_index(self):
        model = TopicModel(phi=np.array([[0.25, 0.25, 0.25, 0.25]]), theta=np.ones((1, 1)),
                           terms=["w", "x", "y", "z"])
        assert topic_top_terms(model, T=2) == [["w", "x"]]

    def test_report_dict(self):
        model = TopicModel(phi=np.array([[0.6, 0.4, 0.0], [0.0, 0.3, 0.7]]), theta=np.ones((1, 2)) / 2,
                           terms=["a", "b", "c"])
        index = index_of(docs_of("a b", "b c", "c a b"), terms=needed_terms(model))
        payload = evaluate_model(model, index, T=3).to_dict()
        assert [row["topic"] for row in payload["topics"]] == [0, 1]
        assert set(payload["average"]) == set(MEASURES)
