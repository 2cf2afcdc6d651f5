"""Sampler configuration, sampler state and fitted topic models."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class SamplerConfig(BaseModel):
    """Gibbs sampler settings.

    ``scaling_ratio`` is the lambda that turns popularity into token weights;
    None means auto (1 / token-weighted mean popularity).
    """

    model_config = ConfigDict(frozen=True)

    topics: int = Field(default=70, ge=1)
    alpha: float = Field(default=0.1, gt=0)
    beta: float = Field(default=0.01, gt=0)
    scaling_ratio: Optional[float] = Field(default=None, gt=0)
    iterations: int = Field(default=1000, ge=1)
    burn_in: int = Field(default=200, ge=0)
    sample_lag: int = Field(default=0, ge=0)
    rng_seed: int = 42
    log_every: int = Field(default=100, ge=0)
    progress: bool = False

    @model_validator(mode="after")
    def _check_schedule(self):
        if self.burn_in >= self.iterations:
            raise ValueError(f"burn_in ({self.burn_in}) must be < iterations ({self.iterations})")
        return self


class SamplerState:
    """Token assignments plus popularity-weighted count tables.

    Tokens are laid out comment by comment (comment index asc, position asc).
    ``omega[t]`` is the weight lambda * p_c of token t's comment.
    """

    def __init__(self, words, docs, omega, z, n_kw, n_kc, n_k, config: SamplerConfig,
                 scaling_ratio: float, rng: np.random.Generator, iteration: int = 0):
        self.words = words
        self.docs = docs
        self.omega = omega
        self.z = z
        self.n_kw = n_kw
        self.n_kc = n_kc
        self.n_k = n_k
        self.config = config
        self.scaling_ratio = scaling_ratio
        self.rng = rng
        self.iteration = iteration
        self.log_likelihood: List[float] = []

    @property
    def n_tokens(self) -> int:
        return int(self.z.shape[0])

    @property
    def n_topics(self) -> int:
        return int(self.n_k.shape[0])

    @property
    def vocab_size(self) -> int:
        return int(self.n_kw.shape[1])

    @property
    def n_comments(self) -> int:
        return int(self.n_kc.shape[0])

    def __repr__(self):
        return (f"<SamplerState tokens={self.n_tokens} K={self.n_topics} "
                f"V={self.vocab_size} iteration={self.iteration}>")


@dataclass
class TopicModel:
    """Row-stochastic phi (K x V) and theta (C x K) with top-word lists"""

    phi: np.ndarray
    theta: np.ndarray
    top_words: List[List[str]] = field(default_factory=list)
    comment_ids: List[str] = field(default_factory=list)
    terms: List[str] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_topics(self) -> int:
        return int(self.phi.shape[0])

    def theta_row(self, comment_id: str) -> np.ndarray:
        return self.theta[self.comment_ids.index(comment_id)]

    def __repr__(self):
        return f"<TopicModel K={self.phi.shape[0]} V={self.phi.shape[1]} C={self.theta.shape[0]}>"


@dataclass
class TopicAssignment:
    """Final single-topic label of a comment"""

    comment_id: str
    thread_id: str
    raw_distribution: np.ndarray
    blended_distribution: np.ndarray
    topic: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "comment_id": self.comment_id,
            "thread_id": self.thread_id,
            "topic": int(self.topic),
            "blended": [float(x) for x in self.blended_distribution],
            "raw": [float(x) for x in self.raw_distribution],
        }
