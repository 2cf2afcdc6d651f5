"""Coherence service: reference-corpus co-occurrence index and six topic-coherence measures."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from models import CoherenceReport, TopicModel

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_SIZES = (5, 10, 70, 110)
DEFAULT_EPSILON = 1e-12
UMASS_EPSILON = 1.0

NPMI_WINDOW = 10
UCI_WINDOW = 10
CV_WINDOW = 110
CA_WINDOW = 5
CP_WINDOW = 70


class CoherenceIndex:
    """Boolean document and sliding-window (co-)occurrence counts for a fixed term set.

    Each count matrix is |terms| x |terms|; the diagonal holds single-term
    frequencies. A document of length L contributes max(1, L) windows per size
    s: one starting at every position, trailing windows shorter than s included.
    """

    def __init__(self, terms: Iterable[str], window_sizes: Iterable[int] = DEFAULT_WINDOW_SIZES,
                 epsilon: float = DEFAULT_EPSILON):
        self.terms: List[str] = sorted(set(terms))
        self.term_index: Dict[str, int] = {term: i for i, term in enumerate(self.terms)}
        self.window_sizes: Tuple[int, ...] = tuple(sorted(set(window_sizes)))
        if any(s < 1 for s in self.window_sizes):
            raise ValueError(f"window sizes must be >= 1, got {self.window_sizes}")
        self.epsilon = epsilon
        n = len(self.terms)
        self.n_documents = 0
        self.document_counts = np.zeros((n, n), dtype=np.int64)
        self.window_totals: Dict[int, int] = {s: 0 for s in self.window_sizes}
        self.window_counts: Dict[int, np.ndarray] = {s: np.zeros((n, n), dtype=np.int64)
                                                     for s in self.window_sizes}

    def _bump(self, matrix: np.ndarray, present: Tuple[int, ...], times: int = 1):
        if present:
            ids = np.asarray(present, dtype=np.int64)
            matrix[np.ix_(ids, ids)] += times

    def add_document(self, tokens: Sequence[str]):
        ids = [self.term_index.get(token, -1) for token in tokens]
        self.n_documents += 1
        self._bump(self.document_counts, tuple(sorted({i for i in ids if i >= 0})))

        length = len(ids)
        for size in self.window_sizes:
            matrix = self.window_counts[size]
            self.window_totals[size] += max(1, length)
            if length == 0:
                continue
            counts: Dict[int, int] = {}
            for i in ids[:size]:
                if i >= 0:
                    counts[i] = counts.get(i, 0) + 1

            # consecutive windows with the same term set are flushed together
            current = tuple(sorted(counts))
            run = 0
            for start in range(length):
                key = tuple(sorted(counts))
                if key != current:
                    self._bump(matrix, current, run)
                    current, run = key, 0
                run += 1

                leaving = ids[start]
                if leaving >= 0:
                    counts[leaving] -= 1
                    if counts[leaving] == 0:
                        del counts[leaving]
                entering = start + size
                if entering < length and ids[entering] >= 0:
                    counts[ids[entering]] = counts.get(ids[entering], 0) + 1
            self._bump(matrix, current, run)

    def merge(self, other: "CoherenceIndex") -> "CoherenceIndex":
        """Add another shard's counts into this index."""
        if other.terms != self.terms or other.window_sizes != self.window_sizes:
            raise ValueError("Cannot merge indexes built for different terms or window sizes")
        self.n_documents += other.n_documents
        self.document_counts += other.document_counts
        for size in self.window_sizes:
            self.window_totals[size] += other.window_totals[size]
            self.window_counts[size] += other.window_counts[size]
        return self

    def _id(self, term: str) -> int:
        try:
            return self.term_index[term]
        except KeyError:
            raise KeyError(f"Term '{term}' was not indexed; add it to the needed terms") from None

    def _window(self, size: int) -> np.ndarray:
        if size not in self.window_counts:
            raise ValueError(f"Window size {size} was not indexed (have {self.window_sizes})")
        return self.window_counts[size]

    def doc_frequency(self, term: str) -> int:
        i = self._id(term)
        return int(self.document_counts[i, i])

    def doc_cofrequency(self, a: str, b: str) -> int:
        return int(self.document_counts[self._id(a), self._id(b)])

    def window_frequency(self, term: str, size: int) -> int:
        i = self._id(term)
        return int(self._window(size)[i, i])

    def window_cofrequency(self, a: str, b: str, size: int) -> int:
        return int(self._window(size)[self._id(a), self._id(b)])

    def n_windows(self, size: int) -> int:
        self._window(size)
        return self.window_totals[size]

    def smoothed(self, count: int, total: int) -> float:
        return (count + self.epsilon) / (total + self.epsilon)

    def probability(self, term: str, size: int) -> float:
        return self.smoothed(self.window_frequency(term, size), self.n_windows(size))

    def joint_probability(self, a: str, b: str, size: int) -> float:
        return self.smoothed(self.window_cofrequency(a, b, size), self.n_windows(size))

    def __repr__(self):
        return f"<CoherenceIndex {self.n_documents} docs, {len(self.terms)} terms, windows={self.window_sizes}>"


def build_index(reference_docs: Iterable[Sequence[str]], needed_terms: Iterable[str],
                window_sizes: Iterable[int] = DEFAULT_WINDOW_SIZES, epsilon: float = DEFAULT_EPSILON,
                progress: bool = False) -> CoherenceIndex:
    """Index a reference corpus given as token lists."""
    index = CoherenceIndex(needed_terms, window_sizes, epsilon)
    for tokens in tqdm(reference_docs, desc="Indexing reference corpus", disable=not progress):
        index.add_document(tokens)
    if index.n_documents == 0:
        raise ValueError("Reference corpus is empty")
    logger.info(f"Indexed {index.n_documents} reference documents for {len(index.terms)} terms")
    return index


def build_index_sharded(shards: Sequence[Sequence[Sequence[str]]], needed_terms: Iterable[str],
                        window_sizes: Iterable[int] = DEFAULT_WINDOW_SIZES, epsilon: float = DEFAULT_EPSILON,
                        max_workers: Optional[int] = None) -> CoherenceIndex:
    """Index shards in parallel and merge them in shard order."""
    needed_terms = list(needed_terms)
    window_sizes = tuple(window_sizes)

    def build_shard(docs):
        shard = CoherenceIndex(needed_terms, window_sizes, epsilon)
        for tokens in docs:
            shard.add_document(tokens)
        return shard

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        parts = list(executor.map(build_shard, shards))
    if not parts:
        raise ValueError("Reference corpus is empty")
    merged = parts[0]
    for part in parts[1:]:
        merged.merge(part)
    if merged.n_documents == 0:
        raise ValueError("Reference corpus is empty")
    return merged


def read_reference_corpus(path, tokenizer):
    """Yield token lists from a one-document-per-line UTF-8 file, skipping empty documents."""
    with open(path, encoding="utf-8") as f:
        for line in f:
            tokens = tokenizer.tokenize(line)
            if tokens:
                yield tokens


def _require_pairs(terms: Sequence[str]):
    if len(terms) < 2:
        raise ValueError(f"Coherence needs at least 2 top words, got {len(terms)}")


def pmi_pair(w_i: str, w_j: str, index: CoherenceIndex, s: int = UCI_WINDOW) -> float:
    joint = index.joint_probability(w_i, w_j, s)
    return math.log(joint / (index.probability(w_i, s) * index.probability(w_j, s)))


def npmi_pair(w_i: str, w_j: str, index: CoherenceIndex, s: int = NPMI_WINDOW) -> float:
    joint = index.joint_probability(w_i, w_j, s)
    if joint >= 1.0:
        # both terms occur in every window
        return 1.0
    value = math.log(joint / (index.probability(w_i, s) * index.probability(w_j, s))) / -math.log(joint)
    return min(1.0, max(-1.0, value))


def c_npmi_topic(top_terms: Sequence[str], index: CoherenceIndex, s: int = NPMI_WINDOW) -> float:
    _require_pairs(top_terms)
    values = [npmi_pair(a, b, index, s) for a, b in combinations(top_terms, 2)]
    return sum(values) / len(values)


def c_uci(top_terms: Sequence[str], index: CoherenceIndex, s: int = UCI_WINDOW) -> float:
    _require_pairs(top_terms)
    values = [pmi_pair(a, b, index, s) for a, b in combinations(top_terms, 2)]
    return sum(values) / len(values)


def umass_with_diagnostics(top_terms: Sequence[str], index: CoherenceIndex) -> Tuple[float, int]:
    """C_UMass plus the number of pairs skipped because the preceding word never occurs."""
    _require_pairs(top_terms)
    n = len(top_terms)
    total = 0.0
    skipped = 0
    for i in range(1, n):
        for j in range(i):
            d_j = index.doc_frequency(top_terms[j])
            if d_j == 0:
                skipped += 1
                continue
            total += math.log((index.doc_cofrequency(top_terms[i], top_terms[j]) + UMASS_EPSILON) / d_j)
    return 2.0 * total / (n * (n - 1)), skipped


def c_umass(top_terms: Sequence[str], index: CoherenceIndex) -> float:
    return umass_with_diagnostics(top_terms, index)[0]


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    norm = float(np.linalg.norm(a) * np.linalg.norm(b))
    if norm == 0.0:
        return 0.0
    return float(np.dot(a, b) / norm)


def context_vectors(top_terms: Sequence[str], index: CoherenceIndex, s: int) -> np.ndarray:
    """Row i holds NPMI(w_i, w_m) for every top word m, itself included."""
    n = len(top_terms)
    vectors = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        for m in range(n):
            vectors[i, m] = npmi_pair(top_terms[i], top_terms[m], index, s)
    return vectors


def c_v(top_terms: Sequence[str], index: CoherenceIndex, s: int = CV_WINDOW) -> float:
    _require_pairs(top_terms)
    vectors = context_vectors(top_terms, index, s)
    whole = vectors.sum(axis=0)
    return sum(_cosine(v, whole) for v in vectors) / len(vectors)


def c_a(top_terms: Sequence[str], index: CoherenceIndex, s: int = CA_WINDOW) -> float:
    _require_pairs(top_terms)
    vectors = context_vectors(top_terms, index, s)
    n = len(top_terms)
    values = [_cosine(vectors[i], vectors[j]) for i in range(n) for j in range(n) if i != j]
    return sum(values) / len(values)


def fitelson(w_i: str, w_prev: str, index: CoherenceIndex, s: int = CP_WINDOW) -> float:
    """(P(w_i|w_prev) - P(w_i|not w_prev)) / (P(w_i|w_prev) + P(w_i|not w_prev))"""
    eps = index.epsilon
    n = index.n_windows(s)
    c_prev = index.window_frequency(w_prev, s)
    c_i = index.window_frequency(w_i, s)
    c_both = index.window_cofrequency(w_i, w_prev, s)
    given = (c_both + eps) / (c_prev + eps) if c_prev > 0 else 0.0
    given_not = (c_i - c_both + eps) / (n - c_prev + eps) if n - c_prev > 0 else 0.0
    if given + given_not == 0.0:
        return 0.0
    return (given - given_not) / (given + given_not)


def c_p(top_terms: Sequence[str], index: CoherenceIndex, s: int = CP_WINDOW) -> float:
    _require_pairs(top_terms)
    values = [fitelson(top_terms[i], top_terms[i - 1], index, s) for i in range(1, len(top_terms))]
    return sum(values) / len(values)


def topic_top_terms(model: TopicModel, T: int = 10) -> List[List[str]]:
    """Top-T terms per topic from phi, descending probability, ties to the lower index."""
    if model.top_words and all(len(words) >= min(T, len(model.terms)) for words in model.top_words):
        return [list(words[:T]) for words in model.top_words]
    n_terms = min(T, model.phi.shape[1])
    indices = np.arange(model.phi.shape[1])
    return [[model.terms[int(i)] for i in np.lexsort((indices, -row))[:n_terms]] for row in model.phi]


def needed_terms(model: TopicModel, T: int = 10) -> List[str]:
    return sorted({term for words in topic_top_terms(model, T) for term in words})


def score_topic(top_terms: Sequence[str], index: CoherenceIndex) -> Tuple[Dict[str, float], int]:
    umass, skipped = umass_with_diagnostics(top_terms, index)
    row = {
        "c_v": c_v(top_terms, index),
        "c_p": c_p(top_terms, index),
        "c_uci": c_uci(top_terms, index),
        "c_umass": umass,
        "c_npmi": c_npmi_topic(top_terms, index),
        "c_a": c_a(top_terms, index),
    }
    return row, skipped


def evaluate_model(model: TopicModel, index: CoherenceIndex, T: int = 10) -> CoherenceReport:
    """All six measures for every topic, plus their averages."""
    report = CoherenceReport()
    for terms in topic_top_terms(model, T):
        row, skipped = score_topic(terms, index)
        report.rows.append(row)
        report.top_words.append(list(terms))
        report.skipped_umass_pairs += skipped
    averages = report.averages
    logger.info("Coherence averages: " + ", ".join(f"{k}={v:.4f}" for k, v in averages.items()))
    return report
