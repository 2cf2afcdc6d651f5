"""Popularity service: level-weighted reply counts for every comment node."""

import logging
from typing import Dict, List, Sequence

from models import Corpus, DiscussionTree, WeightSequence

logger = logging.getLogger(__name__)

INITIAL_POPULARITY = 1.0


class PopularityScorer:
    """Scores p_i = 1 + sum_l w(l) * |descendants of i at distance l|."""

    def __init__(self, seq: WeightSequence):
        self.seq = seq
        self._weights: List[float] = []

    def _weight(self, distance: int) -> float:
        while len(self._weights) < distance:
            self._weights.append(self.seq.weight_at(len(self._weights) + 1))
        return self._weights[distance - 1]

    def depth_profiles(self, tree: DiscussionTree) -> Dict[str, List[int]]:
        """profile[i][l-1] = number of descendants of i exactly l levels below it."""
        profiles: Dict[str, List[int]] = {}
        order = [node for node, _ in tree.breadth_first()]
        for node in reversed(order):
            profile: List[int] = []
            for child in tree.children.get(node, ()):
                child_profile = profiles[child]
                if not profile:
                    profile.append(0)
                profile[0] += 1
                for offset, count in enumerate(child_profile, start=1):
                    if offset == len(profile):
                        profile.append(0)
                    profile[offset] += count
            profiles[node] = profile
        return profiles

    def score_tree(self, tree: DiscussionTree) -> Dict[str, float]:
        scores = {}
        for node, profile in self.depth_profiles(tree).items():
            total = INITIAL_POPULARITY
            for distance, count in enumerate(profile, start=1):
                total += self._weight(distance) * count
            scores[node] = total
        return scores

    def score_corpus(self, corpus: Corpus) -> Dict[str, float]:
        scores: Dict[str, float] = {}
        for tree in corpus.trees:
            scores.update(self.score_tree(tree))
        if scores:
            logger.info(f"Scored {len(scores)} comments with {self.seq.describe()}, "
                        f"max popularity {max(scores.values()):.3f}")
        return scores


def score_tree(tree, seq):
    """Standalone wrapper: popularity of every node in ``tree``."""
    return PopularityScorer(seq).score_tree(tree)


def score_corpus(corpus, seq):
    """Standalone wrapper: popularity of every comment in ``corpus``."""
    return PopularityScorer(seq).score_corpus(corpus)


def popularity_distribution(corpus: Corpus, seq: WeightSequence) -> List[float]:
    """Popularity scores sorted in descending order, for comparing sequences."""
    return sorted(score_corpus(corpus, seq).values(), reverse=True)


def popularity_rows(corpus: Corpus, scores: Dict[str, float]) -> Sequence[dict]:
    """Rows for the comment_id, thread_id, popularity CSV."""
    return [
        {"comment_id": c.id, "thread_id": c.thread_id, "popularity": scores[c.id]}
        for c in corpus.comments if c.id in scores
    ]
