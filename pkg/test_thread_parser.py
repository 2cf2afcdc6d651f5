"""Tests for thread parsing, tokenization, vocabulary and corpus construction."""

import json

import numpy as np
import pytest

from conftest import ROADS_PARENTS, LEVELS_PARENTS, parse_records, random_parents, records_from_parents
from models import Corpus, TokenizerConfig, Vocabulary
from services.thread_parser import (
    ThreadParser,
    build_corpus,
    build_vocabulary,
    compute_levels,
    filter_threads,
    level_histogram,
    parse_threads,
    tokenize,
    trees_to_records,
)
from utils.stopwords import load_stopwords


def _lines(records):
    return [json.dumps(r) for r in records]


class TestParseThreads:

    def test_single_record_is_a_root(self):
        trees = parse_threads(_lines([{"id": "a", "parent_id": None, "thread_id": "t", "body": "hi"}]))
        assert len(trees) == 1
        tree = trees[0]
        assert tree.root_id == "a"
        assert tree.children == {"a": ()}
        assert tree.comments["a"].level == 1

    def test_reference_tree_structure(self, roads_tree):
        assert roads_tree.root_id == "0"
        assert roads_tree.children["0"] == ("1", "6", "8")
        assert roads_tree.children["1"] == ("2", "4")
        assert roads_tree.children["2"] == ("3",)
        assert roads_tree.children["8"] == ("9",)
        assert roads_tree.children["9"] == ()
        assert len(roads_tree) == 10

    def test_self_parent_rejects_thread(self):
        parser = ThreadParser()
        trees = parser.parse(_lines([
            {"id": "a", "parent_id": None, "thread_id": "ok", "body": "x"},
            {"id": "b", "parent_id": "b", "thread_id": "bad", "body": "y"},
        ]))
        assert [t.thread_id for t in trees] == ["ok"]
        assert parser.report.cyclic_threads == 1
        assert parser.report.rejected_threads == ["bad"]

    def test_longer_cycle_rejects_thread(self):
        parser = ThreadParser()
        trees = parser.parse(_lines([
            {"id": "r", "parent_id": None, "thread_id": "t", "body": "root"},
            {"id": "a", "parent_id": "b", "thread_id": "t", "body": "x"},
            {"id": "b", "parent_id": "a", "thread_id": "t", "body": "y"},
        ]))
        assert trees == []
        assert parser.report.cyclic_threads == 1

    def test_duplicate_id_rejected_with_count(self):
        parser = ThreadParser()
        trees = parser.parse(_lines([
            {"id": "a", "parent_id": None, "thread_id": "t", "body": "first"},
            {"id": "a", "parent_id": None, "thread_id": "t", "body": "second"},
        ]))
        assert trees[0].comments["a"].raw_text == "first"
        assert parser.report.duplicate_ids == 1

    def test_orphan_subtree_dropped(self):
        parser = ThreadParser()
        trees = parser.parse(_lines([
            {"id": "r", "parent_id": None, "thread_id": "t", "body": "root"},
            {"id": "o", "parent_id": "missing", "thread_id": "t", "body": "orphan"},
            {"id": "oc", "parent_id": "o", "thread_id": "t", "body": "orphan child"},
            {"id": "c", "parent_id": "r", "thread_id": "t", "body": "reply"},
        ]))
        tree = trees[0]
        assert set(tree.comments) == {"r", "c"}
        assert parser.report.orphans_dropped == 2

    def test_malformed_lines_counted(self):
        parser = ThreadParser()
        trees = parser.parse(["{not json", json.dumps({"id": "a", "thread_id": "t"}),
                              json.dumps({"id": "b", "parent_id": None, "thread_id": "t", "body": "ok"})])
        assert len(trees) == 1
        assert parser.report.malformed == 2

    def test_threads_in_first_appearance_order(self):
        trees = parse_threads(_lines([
            {"id": "z1", "parent_id": None, "thread_id": "zeta", "body": "a"},
            {"id": "a1", "parent_id": None, "thread_id": "alpha", "body": "b"},
            {"id": "z2", "parent_id": "z1", "thread_id": "zeta", "body": "c"},
        ]))
        assert [t.thread_id for t in trees] == ["zeta", "alpha"]

    def test_pushshift_prefixes_stripped(self):
        trees = parse_threads(_lines([
            {"id": "sub", "title": "Road work", "selftext": "which road first", "link_id": "t3_sub"},
            {"id": "c1", "parent_id": "t3_sub", "link_id": "t3_sub", "body": "the bridge"},
            {"id": "c2", "parent_id": "t1_c1", "link_id": "t3_sub", "body": "agreed"},
        ]), fmt="pushshift")
        tree = trees[0]
        assert tree.thread_id == "sub"
        assert tree.root_id == "sub"
        assert tree.comments["sub"].raw_text == "Road work which road first"
        assert tree.children["sub"] == ("c1",)
        assert tree.children["c1"] == ("c2",)

    def test_parallel_parse_matches_serial(self):
        rng = np.random.default_rng(3)
        records = []
        for t in range(12):
            records.extend(records_from_parents(random_parents(rng, 20, f"p{t}"), f"p{t}"))
        serial = ThreadParser().parse(_lines(records))
        parallel = ThreadParser(max_workers=4).parse(_lines(records))
        assert serial == parallel

    def test_parallel_report_matches_serial(self):
        records = []
        for t in range(40):
            thread = f"t{t:02d}"
            records.append({"id": f"{thread}-r", "parent_id": None if t % 4 else f"{thread}-r",
                            "thread_id": thread, "body": "root"})
            records.append({"id": f"{thread}-o", "parent_id": "gone", "thread_id": thread, "body": "orphan"})
            if t % 5 == 0:
                records.append({"id": f"{thread}-x", "parent_id": None, "thread_id": thread, "body": "second root"})
        serial = ThreadParser()
        serial.parse(_lines(records))
        for _ in range(5):
            parallel = ThreadParser(max_workers=8)
            parallel.parse(_lines(records))
            assert parallel.report == serial.report
        assert serial.report.cyclic_threads == 10
        assert serial.report.rejected_threads == [f"t{t:02d}" for t in range(0, 40, 4)]

    def test_build_tree_returns_its_own_counts(self):
        parser = ThreadParser()
        tree, drops = parser.build_tree("t", [
            {"id": "r", "parent_id": None, "thread_id": "t", "body": "root"},
            {"id": "o", "parent_id": "gone", "thread_id": "t", "body": "orphan"},
        ])
        assert tree.root_id == "r"
        assert drops == {"orphans_dropped": 1}
        assert parser.report.orphans_dropped == 0

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            ThreadParser(fmt="xml")

    def test_round_trip(self, roads_tree):
        reparsed = parse_records(trees_to_records([roads_tree]))[0]
        assert reparsed.children == roads_tree.children
        assert {c: reparsed.parent_of(c) for c in reparsed.comments} == ROADS_PARENTS


class TestTokenize:

    def test_empty(self):
        assert tokenize("") == []

    def test_rules(self):
        assert tokenize("All roads WORK, roads!", TokenizerConfig(min_len=2)) == ["all", "roads", "work", "roads"]

    def test_emoji_only(self):
        assert tokenize("\U0001F602\U0001F44D") == []

    def test_min_len_and_stopwords(self):
        config = TokenizerConfig(min_len=3, stopwords={"Roads"})
        assert tokenize("All roads to Rome", config) == ["all", "rome"]

    def test_default_stopwords(self):
        config = TokenizerConfig(use_default_stopwords=True)
        assert tokenize("the bridge is out", config) == ["bridge"]

    def test_stopword_file(self, tmp_path):
        path = tmp_path / "stop.txt"
        path.write_text("Bridge\n\nroad\n", encoding="utf-8")
        assert load_stopwords(path) == frozenset({"bridge", "road"})


class TestBuildVocabulary:

    def test_first_occurrence_order(self):
        vocab = build_vocabulary(["a", "b", "a"], min_count=1)
        assert vocab.to_dict() == {"a": 0, "b": 1}
        assert vocab.frequency("a") == 2
        assert vocab.frequency("b") == 1

    def test_min_count(self):
        assert build_vocabulary(["a", "b", "a"], min_count=2).to_dict() == {"a": 0}

    def test_empty(self):
        assert len(build_vocabulary([], min_count=1)) == 0

    def test_documents(self):
        vocab = build_vocabulary([["x", "y"], ["y", "z"]])
        assert vocab.terms == ["x", "y", "z"]

    def test_invalid_min_count(self):
        with pytest.raises(ValueError):
            build_vocabulary(["a"], min_count=0)


class TestLevels:

    def test_single_node(self, tree_builder):
        assert compute_levels(tree_builder({"a": None})) == {"a": 1}

    def test_four_level_tree(self, levels_tree):
        levels = compute_levels(levels_tree)
        assert levels == {"1": 1, "2": 2, "3": 2, "4": 2, "5": 3, "6": 3, "7": 3, "8": 4, "9": 4}

    def test_chain(self, tree_builder):
        tree = tree_builder({"a": None, "b": "a", "c": "b", "d": "c", "e": "d"})
        assert list(compute_levels(tree).values()) == [1, 2, 3, 4, 5]

    def test_random_trees_match_bfs_depth(self, random_tree_factory):
        rng = np.random.default_rng(11)
        for i in range(50):
            tree = random_tree_factory(rng, int(rng.integers(1, 40)), f"r{i}")
            levels = compute_levels(tree)
            for node, depth in tree.breadth_first():
                assert levels[node] == depth + 1
                assert tree.comments[node].level == depth + 1
            assert sum(level_histogram(tree).values()) == len(tree)

    def test_histogram(self, levels_tree):
        assert level_histogram(levels_tree) == {1: 1, 2: 3, 3: 3, 4: 2}


class TestCorpus:

    def test_emoji_comment_kept_without_tokens(self, roads_corpus):
        assert roads_corpus.n_comments == 10
        assert roads_corpus.comment("9").tokens == ()

    def test_preorder_indexing(self, roads_corpus):
        assert [c.id for c in roads_corpus.comments] == ["0", "1", "2", "3", "4", "5", "6", "7", "8", "9"]

    def test_tokens_within_vocabulary(self, roads_corpus):
        V = len(roads_corpus.vocabulary)
        assert all(0 <= t < V for c in roads_corpus.comments for t in c.tokens)

    def test_duplicate_ids_across_threads(self, tree_builder):
        a = tree_builder({"x": None}, "t1")
        b = tree_builder({"x": None}, "t2")
        with pytest.raises(ValueError):
            Corpus([a, b], Vocabulary())

    def test_subcorpus(self, threaded_corpus):
        sub = threaded_corpus.subcorpus("t1")
        assert sub.n_comments == 6
        assert sub.vocabulary is threaded_corpus.vocabulary
        with pytest.raises(KeyError):
            threaded_corpus.subcorpus("missing")

    def test_filter_counts_all_descendants(self, levels_tree, tree_builder):
        small = tree_builder({"s": None, "s1": "s"}, "small")
        kept = filter_threads([levels_tree, small], min_descendants=8)
        assert [t.thread_id for t in kept] == ["levels"]
        assert len(filter_threads([levels_tree, small], min_descendants=0)) == 2

    def test_build_corpus_min_count(self, roads_tree):
        corpus = build_corpus([roads_tree], TokenizerConfig(min_len=2), min_count=2)
        assert all(f >= 2 for f in corpus.vocabulary.frequencies)
        assert "potholes" in corpus.vocabulary
