"""Shared fixtures: the two reference discussion trees, toy corpora and tree builders."""

import json

import numpy as np
import pytest

from models import TokenizerConfig
from services.thread_parser import ThreadParser, build_corpus

# child -> parent; comment 9 is an emoji-only reply
ROADS_PARENTS = {"0": None, "1": "0", "2": "1", "3": "2", "4": "1", "5": "4", "6": "0", "7": "6", "8": "0", "9": "8"}
ROADS_BODIES = {
    "0": "All roads lead somewhere, which road should the city fix first?",
    "1": "Fix the bridge road before winter, the potholes are dangerous",
    "2": "Bridge potholes broke my tire last week",
    "3": "Same here, tire shops are busy all month",
    "4": "Winter salt makes the potholes worse every year",
    "5": "Salt trucks ran all night on the bridge",
    "6": "The city budget has money for roads this year",
    "7": "Budget meeting is on Tuesday at city hall",
    "8": "Downtown roads are fine, fix the suburbs",
    "9": "\U0001F602\U0001F602",
}

# the four-level tree: levels {1}, {2,3,4}, {5,6,7}, {8,9}
LEVELS_PARENTS = {"1": None, "2": "1", "3": "1", "4": "1", "5": "2", "6": "3", "7": "3", "8": "5", "9": "7"}


def records_from_parents(parents, thread_id="t1", bodies=None):
    bodies = bodies or {}
    return [
        {"id": cid, "parent_id": parent, "thread_id": thread_id, "body": bodies.get(cid, f"comment {cid}")}
        for cid, parent in parents.items()
    ]


def parse_records(records, fmt="generic-jsonl"):
    return ThreadParser(fmt=fmt).parse(json.dumps(r) for r in records)


def tree_from_parents(parents, thread_id="t1", bodies=None):
    return parse_records(records_from_parents(parents, thread_id, bodies))[0]


def random_parents(rng, n_nodes, thread_id="r"):
    """Uniform random recursive tree: node i attaches to any earlier node."""
    parents = {f"{thread_id}-0": None}
    for i in range(1, n_nodes):
        parents[f"{thread_id}-{i}"] = f"{thread_id}-{int(rng.integers(0, i))}"
    return parents


@pytest.fixture
def roads_records():
    return records_from_parents(ROADS_PARENTS, "roads", ROADS_BODIES)


@pytest.fixture
def roads_tree(roads_records):
    return parse_records(roads_records)[0]


@pytest.fixture
def roads_corpus(roads_tree):
    return build_corpus([roads_tree], TokenizerConfig(min_len=2))


@pytest.fixture
def levels_tree():
    return tree_from_parents(LEVELS_PARENTS, "levels")


@pytest.fixture
def tree_builder():
    return tree_from_parents


@pytest.fixture
def random_tree_factory():
    def factory(rng, n_nodes, thread_id="r"):
        return tree_from_parents(random_parents(rng, n_nodes, thread_id), thread_id)
    return factory


@pytest.fixture
def toy_corpus():
    """50 single-comment threads over an 8-word vocabulary, deterministic"""
    rng = np.random.default_rng(7)
    words = ["apple", "banana", "cherry", "grape", "lemon", "mango", "peach", "plum"]
    records = []
    for i in range(50):
        length = int(rng.integers(3, 9))
        body = " ".join(words[int(j)] for j in rng.integers(0, len(words), size=length))
        records.append({"id": f"c{i}", "parent_id": None, "thread_id": f"t{i}", "body": body})
    return build_corpus(parse_records(records), TokenizerConfig(min_len=2))


@pytest.fixture
def threaded_corpus():
    """Three small threads with replies, used where popularity must vary"""
    records = []
    bodies = ["rain storm cloud", "storm warning tonight", "cloud cover rain", "warning sirens loud",
              "sun beach sand", "beach towel sun", "sand castle beach", "storm sun rain"]
    for t in range(3):
        parents = {f"t{t}-0": None, f"t{t}-1": f"t{t}-0", f"t{t}-2": f"t{t}-0", f"t{t}-3": f"t{t}-1",
                   f"t{t}-4": f"t{t}-3", f"t{t}-5": f"t{t}-3"}
        for n, (cid, parent) in enumerate(parents.items()):
            records.append({"id": cid, "parent_id": parent, "thread_id": f"t{t}",
                            "body": bodies[(n + 3 * t) % len(bodies)]})
    return build_corpus(parse_records(records), TokenizerConfig(min_len=2))
