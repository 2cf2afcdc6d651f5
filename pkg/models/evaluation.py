"""Coherence reports, synthetic benchmark settings and ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field

MEASURES = ("c_v", "c_p", "c_uci", "c_umass", "c_npmi", "c_a")


@dataclass
class CoherenceReport:
    """Per-topic coherence rows plus their arithmetic means"""

    rows: List[Dict[str, float]] = field(default_factory=list)
    top_words: List[List[str]] = field(default_factory=list)
    skipped_umass_pairs: int = 0

    @property
    def averages(self) -> Dict[str, float]:
        if not self.rows:
            return {m: 0.0 for m in MEASURES}
        return {m: sum(row[m] for row in self.rows) / len(self.rows) for m in MEASURES}

    def to_dict(self) -> Dict:
        return {
            "topics": [dict(topic=k, **row) for k, row in enumerate(self.rows)],
            "average": self.averages,
            "skipped_umass_pairs": self.skipped_umass_pairs,
        }


class SyntheticSpec(BaseModel):
    """Planted-topic thread generator settings"""

    model_config = ConfigDict(frozen=True)

    n_threads: int = Field(default=20, ge=1)
    comments_per_thread: int = Field(default=100, ge=1)
    k_true: int = Field(default=4, ge=1)
    vocab_per_topic: int = Field(default=30, ge=1)
    shared_noise_vocab: int = Field(default=40, ge=0)
    noise_leaf_fraction: float = Field(default=0.3, ge=0, le=1)
    topic_shift_prob: float = Field(default=0.1, ge=0, le=1)
    noise_word_prob: float = Field(default=0.2, ge=0, le=1)
    tokens_per_comment: float = Field(default=6.0, gt=0)
    branching_p: float = Field(default=0.45, gt=0, le=1)
    empty_noise_prob: float = Field(default=0.5, ge=0, le=1)
    rng_seed: int = 0


@dataclass
class GroundTruth:
    """comment id -> planted topic"""

    labels: Dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, comment_id: str) -> int:
        return self.labels[comment_id]
