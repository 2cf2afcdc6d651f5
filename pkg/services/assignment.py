"""Assignment service: blend each comment's topic mix with its ancestors' along the root path."""

import logging
from typing import Dict, List, Sequence

import numpy as np

from models import Corpus, DiscussionTree, TopicAssignment, TopicModel, WeightSequence

logger = logging.getLogger(__name__)


def path_to_root(tree: DiscussionTree, comment_id: str) -> List[str]:
    """Comment ids from the root down to ``comment_id``."""
    if comment_id not in tree.comments:
        raise KeyError(f"Comment '{comment_id}' is not in thread '{tree.thread_id}'")
    path = [comment_id]
    parent = tree.comments[comment_id].parent_id
    while parent is not None:
        path.append(parent)
        parent = tree.comments[parent].parent_id
    path.reverse()
    return path


def blend_distribution(path_thetas: Sequence[np.ndarray], seq: WeightSequence) -> np.ndarray:
    """Weighted average of the path's topic mixes, root first.

    The node itself gets w(1), its parent w(2), ..., the root w(level).
    """
    if len(path_thetas) == 0:
        raise ValueError("path must contain at least the node itself")
    own = np.asarray(path_thetas[-1], dtype=np.float64)
    if len(path_thetas) == 1:
        return own.copy()

    depth = len(path_thetas)
    weights = np.array([seq.weight_at(depth - j) for j in range(depth)], dtype=np.float64)
    total = weights.sum()
    if total <= 0:
        return own.copy()
    stacked = np.asarray(path_thetas, dtype=np.float64)
    return weights @ stacked / total


class TopicAssigner:
    """Service producing one topic per comment from a fitted model."""

    def __init__(self, seq: WeightSequence):
        self.seq = seq

    def assign_tree(self, tree: DiscussionTree, theta_of: Dict[str, np.ndarray]) -> List[TopicAssignment]:
        assignments = []
        for comment_id in tree.preorder():
            raw = theta_of[comment_id]
            blended = blend_distribution([theta_of[node] for node in path_to_root(tree, comment_id)], self.seq)
            assignments.append(TopicAssignment(
                comment_id=comment_id,
                thread_id=tree.thread_id,
                raw_distribution=raw,
                blended_distribution=blended,
                topic=int(np.argmax(blended)),
            ))
        return assignments

    def assign_all(self, model: TopicModel, corpus: Corpus) -> List[TopicAssignment]:
        row_of = {comment_id: i for i, comment_id in enumerate(model.comment_ids)}
        missing = [c.id for c in corpus.comments if c.id not in row_of]
        if missing:
            raise ValueError(f"Model theta does not cover {len(missing)} comments (first: '{missing[0]}')")
        theta_of = {c.id: model.theta[row_of[c.id]] for c in corpus.comments}

        assignments = []
        for tree in corpus.trees:
            assignments.extend(self.assign_tree(tree, theta_of))
        changed = sum(1 for a in assignments if a.topic != int(np.argmax(a.raw_distribution)))
        logger.info(f"Assigned topics to {len(assignments)} comments; "
                    f"{changed} differ from the raw argmax")
        return assignments


def assign_all(model, corpus, seq):
    """Standalone wrapper for TopicAssigner.assign_all."""
    return TopicAssigner(seq).assign_all(model, corpus)


def raw_assignments(model: TopicModel, corpus: Corpus) -> List[TopicAssignment]:
    """Baseline labels: argmax of each comment's own theta row, no blending."""
    row_of = {comment_id: i for i, comment_id in enumerate(model.comment_ids)}
    assignments = []
    for comment in corpus.comments:
        raw = model.theta[row_of[comment.id]]
        assignments.append(TopicAssignment(comment.id, comment.thread_id, raw, raw.copy(), int(np.argmax(raw))))
    return assignments
