"""Synthetic benchmark service: planted-topic discussion trees and assignment accuracy."""

import json
import logging
from collections import deque
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from models import Corpus, GroundTruth, SyntheticSpec, TokenizerConfig, TopicAssignment
from services.thread_parser import ThreadParser, build_corpus

logger = logging.getLogger(__name__)

# bodies of empty noise leaves; they tokenize to nothing
EMOJI_BODIES = ("\U0001F602", "\U0001F44D\U0001F44D", "\U0001F525", "\U0001F914\U0001F602", "\U0001F480")
SYNTHETIC_TOKENIZER = TokenizerConfig(min_len=1)


def topic_term(topic: int, i: int) -> str:
    return f"topic{topic}word{i}"


def noise_term(i: int) -> str:
    return f"noise{i}"


class SyntheticGenerator:
    """Grows reply trees whose comments carry a planted topic."""

    def __init__(self, spec: SyntheticSpec):
        self.spec = spec

    def _thread_rng(self, thread_number: int) -> np.random.Generator:
        return np.random.default_rng([self.spec.rng_seed, thread_number])

    def _other_topic(self, rng, topic: int) -> int:
        if self.spec.k_true == 1:
            return topic
        shifted = int(rng.integers(0, self.spec.k_true - 1))
        return shifted if shifted < topic else shifted + 1

    def _topical_body(self, rng, topic: int) -> str:
        spec = self.spec
        length = max(1, int(rng.poisson(spec.tokens_per_comment)))
        words = []
        for _ in range(length):
            if spec.shared_noise_vocab and rng.random() < spec.noise_word_prob:
                words.append(noise_term(int(rng.integers(0, spec.shared_noise_vocab))))
            else:
                words.append(topic_term(topic, int(rng.integers(0, spec.vocab_per_topic))))
        return " ".join(words)

    def _noise_body(self, rng) -> str:
        spec = self.spec
        if spec.shared_noise_vocab == 0 or rng.random() < spec.empty_noise_prob:
            return EMOJI_BODIES[int(rng.integers(0, len(EMOJI_BODIES)))]
        length = int(rng.integers(1, 4))
        return " ".join(noise_term(int(rng.integers(0, spec.shared_noise_vocab))) for _ in range(length))

    def generate_thread(self, thread_number: int) -> Tuple[List[dict], Dict[str, int]]:
        spec = self.spec
        rng = self._thread_rng(thread_number)
        thread_id = f"s{spec.rng_seed}-t{thread_number}"

        parents: List[int] = [-1]
        topics: List[int] = [int(rng.integers(0, spec.k_true))]
        children: List[List[int]] = [[]]
        frontier = deque([0])
        while len(parents) < spec.comments_per_thread:
            reopened = not frontier
            parent = int(rng.integers(0, len(parents))) if reopened else frontier.popleft()
            n_children = int(rng.geometric(spec.branching_p)) - 1
            if reopened:
                n_children = max(1, n_children)
            for _ in range(min(n_children, spec.comments_per_thread - len(parents))):
                node = len(parents)
                topic = topics[parent]
                if rng.random() < spec.topic_shift_prob:
                    topic = self._other_topic(rng, topic)
                parents.append(parent)
                topics.append(topic)
                children.append([])
                children[parent].append(node)
                frontier.append(node)

        records = []
        truth = {}
        for node, parent in enumerate(parents):
            comment_id = f"{thread_id}-c{node}"
            is_noise_leaf = node > 0 and not children[node] and rng.random() < spec.noise_leaf_fraction
            body = self._noise_body(rng) if is_noise_leaf else self._topical_body(rng, topics[node])
            records.append({
                "id": comment_id,
                "parent_id": None if parent < 0 else f"{thread_id}-c{parent}",
                "thread_id": thread_id,
                "body": body,
            })
            truth[comment_id] = topics[node]
        return records, truth

    def generate_records(self) -> Tuple[List[dict], GroundTruth]:
        records: List[dict] = []
        truth = GroundTruth()
        for thread_number in range(self.spec.n_threads):
            thread_records, thread_truth = self.generate_thread(thread_number)
            records.extend(thread_records)
            truth.labels.update(thread_truth)
        return records, truth

    def generate(self) -> Tuple[Corpus, GroundTruth]:
        records, truth = self.generate_records()
        trees = ThreadParser().parse(json.dumps(r) for r in records)
        corpus = build_corpus(trees, SYNTHETIC_TOKENIZER, min_count=1)
        logger.info(f"Generated synthetic corpus: {corpus.n_comments} comments, {corpus.n_tokens} tokens, "
                    f"K_true={self.spec.k_true}, seed={self.spec.rng_seed}")
        return corpus, truth

    def reference_documents(self, n_docs: int = 2000, doc_length: int = 40) -> List[List[str]]:
        """Topic-pure documents for the coherence reference corpus."""
        spec = self.spec
        rng = np.random.default_rng([spec.rng_seed, 1_000_003])
        docs = []
        for _ in range(n_docs):
            topic = int(rng.integers(0, spec.k_true))
            docs.append(self._topical_body(rng, topic).split()[:doc_length] if doc_length else [])
        return docs


def generate(spec: SyntheticSpec) -> Tuple[Corpus, GroundTruth]:
    """Standalone wrapper: planted-topic corpus and its ground truth."""
    return SyntheticGenerator(spec).generate()


def generate_reference_corpus(spec: SyntheticSpec, n_docs: int = 2000) -> List[List[str]]:
    return SyntheticGenerator(spec).reference_documents(n_docs)


def _labels(assignments: Union[Sequence[TopicAssignment], Mapping[str, int]]) -> Dict[str, int]:
    if isinstance(assignments, Mapping):
        return {str(k): int(v) for k, v in assignments.items()}
    return {a.comment_id: int(a.topic) for a in assignments}


def assignment_accuracy(assignments, truth: GroundTruth) -> float:
    """Fraction correct under the best one-to-one matching of predicted to true labels."""
    predicted = _labels(assignments)
    missing = [cid for cid in truth.labels if cid not in predicted]
    if missing:
        raise ValueError(f"Assignments do not cover {len(missing)} ground-truth comments (first: '{missing[0]}')")
    if not truth.labels:
        raise ValueError("Ground truth is empty")

    ids = list(truth.labels)
    pred = np.array([predicted[cid] for cid in ids], dtype=np.int64)
    true = np.array([truth.labels[cid] for cid in ids], dtype=np.int64)
    confusion = np.zeros((pred.max() + 1, true.max() + 1), dtype=np.int64)
    np.add.at(confusion, (pred, true), 1)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    return float(confusion[rows, cols].sum()) / len(ids)
