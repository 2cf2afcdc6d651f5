"""Collapsed Gibbs sampler with popularity-weighted counts.

Random-number protocol (shared by every chain, and by any reference sampler
that wants to reproduce a trace): a ``numpy.random.default_rng(seed)``
generator draws the initial assignments with ``integers(0, K, size=N)``, then
each sweep draws ``random(N)`` uniforms, one per token in visit order (comment
index asc, position asc). A token's new topic is the first k whose running sum
of unnormalized weights exceeds ``u * total``.
"""

import io
import json
import logging
import zipfile
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np
from numba import njit
from tqdm import tqdm

from models import Corpus, SamplerConfig, SamplerState, TopicModel, Vocabulary
from utils.logging_utils import log_event

logger = logging.getLogger(__name__)

CHECKPOINT_TIMESTAMP = (1980, 1, 1, 0, 0, 0)


@njit(cache=True, nogil=True)
def _accumulate(words, docs, omega, z, n_kw, n_kc, n_k):
    for t in range(z.shape[0]):
        k = z[t]
        n_kw[k, words[t]] += omega[t]
        n_kc[docs[t], k] += omega[t]
        n_k[k] += omega[t]


@njit(cache=True, nogil=True)
def _sweep(words, docs, omega, z, n_kw, n_kc, n_k, alpha, beta, vbeta, uniforms, buf):
    n_topics = n_k.shape[0]
    log_likelihood = 0.0
    for t in range(z.shape[0]):
        k = z[t]
        w = words[t]
        c = docs[t]
        weight = omega[t]

        n_kw[k, w] -= weight
        if n_kw[k, w] < 0.0:
            n_kw[k, w] = 0.0
        n_kc[c, k] -= weight
        if n_kc[c, k] < 0.0:
            n_kc[c, k] = 0.0
        n_k[k] -= weight
        if n_k[k] < 0.0:
            n_k[k] = 0.0

        total = 0.0
        for j in range(n_topics):
            p = (n_kc[c, j] + alpha) * (n_kw[j, w] + beta) / (n_k[j] + vbeta)
            buf[j] = p
            total += p

        target = uniforms[t] * total
        cumulative = 0.0
        new_topic = n_topics - 1
        for j in range(n_topics):
            cumulative += buf[j]
            if target < cumulative:
                new_topic = j
                break
        log_likelihood += np.log(buf[new_topic] / total)

        z[t] = new_topic
        n_kw[new_topic, w] += weight
        n_kc[c, new_topic] += weight
        n_k[new_topic] += weight
    return log_likelihood


def lda_baseline_scores(corpus: Corpus) -> Dict[str, float]:
    """Uniform popularity; with scaling_ratio=1 the sampler is plain LDA."""
    return {comment.id: 1.0 for comment in corpus.comments}


def auto_scaling_ratio(corpus: Corpus, scores: Dict[str, float]) -> float:
    """1 / token-weighted mean popularity, so the mean token weight is 1."""
    n_tokens = 0
    weighted = 0.0
    for comment in corpus.comments:
        if comment.tokens:
            n_tokens += len(comment.tokens)
            weighted += len(comment.tokens) * scores[comment.id]
    if n_tokens == 0 or weighted <= 0:
        return 1.0
    return n_tokens / weighted


class GibbsSampler:
    """Service owning one Markov chain over a corpus."""

    def __init__(self, corpus: Corpus, scores: Dict[str, float], config: SamplerConfig):
        self.corpus = corpus
        self.scores = scores
        self.config = config
        self.state: Optional[SamplerState] = None

    def init_state(self) -> SamplerState:
        corpus, scores, config = self.corpus, self.scores, self.config
        for comment in corpus.comments:
            if comment.tokens and comment.id not in scores:
                raise ValueError(f"Comment '{comment.id}' has tokens but no popularity score")

        scaling_ratio = config.scaling_ratio or auto_scaling_ratio(corpus, scores)
        words, docs, omega = [], [], []
        for c, comment in enumerate(corpus.comments):
            if not comment.tokens:
                continue
            weight = scaling_ratio * scores[comment.id]
            words.extend(comment.tokens)
            docs.extend([c] * len(comment.tokens))
            omega.extend([weight] * len(comment.tokens))

        words = np.asarray(words, dtype=np.int64)
        docs = np.asarray(docs, dtype=np.int64)
        omega = np.asarray(omega, dtype=np.float64)
        if np.any(omega <= 0):
            raise ValueError("Token weights must be positive; check popularity scores and scaling ratio")

        rng = np.random.default_rng(config.rng_seed)
        z = rng.integers(0, config.topics, size=words.shape[0]).astype(np.int64)
        n_kw = np.zeros((config.topics, len(corpus.vocabulary)), dtype=np.float64)
        n_kc = np.zeros((corpus.n_comments, config.topics), dtype=np.float64)
        n_k = np.zeros(config.topics, dtype=np.float64)
        _accumulate(words, docs, omega, z, n_kw, n_kc, n_k)

        self.state = SamplerState(words, docs, omega, z, n_kw, n_kc, n_k, config, scaling_ratio, rng)
        log_event(logger, 'info', "Initialized sampler", tokens=words.shape[0], topics=config.topics,
                  vocab=len(corpus.vocabulary), scaling_ratio=f"{scaling_ratio:.6f}", seed=config.rng_seed)
        return self.state

    def fit(self) -> TopicModel:
        """Run sweeps up to ``config.iterations`` and estimate the model."""
        if self.state is None:
            self.init_state()
        state, config = self.state, self.config

        phi_sum = None
        theta_sum = None
        samples = 0
        for _ in tqdm(range(state.iteration, config.iterations), desc="Gibbs sweeps",
                      disable=not config.progress):
            log_likelihood = sweep(state)
            iteration = state.iteration
            if config.log_every and iteration % config.log_every == 0:
                state.log_likelihood.append(log_likelihood)
                log_event(logger, 'info', "Gibbs sweep", iteration=iteration,
                          log_likelihood=f"{log_likelihood:.3f}")
            if config.sample_lag and iteration > config.burn_in and \
                    (iteration - config.burn_in) % config.sample_lag == 0:
                phi = estimate_phi(state)
                theta = estimate_theta(state)
                phi_sum = phi if phi_sum is None else phi_sum + phi
                theta_sum = theta if theta_sum is None else theta_sum + theta
                samples += 1

        if samples:
            phi = phi_sum / samples
            theta = theta_sum / samples
            phi /= phi.sum(axis=1, keepdims=True)
            theta /= theta.sum(axis=1, keepdims=True)
        else:
            phi = estimate_phi(state)
            theta = estimate_theta(state)

        return TopicModel(
            phi=phi,
            theta=theta,
            top_words=top_words(phi, self.corpus.vocabulary),
            comment_ids=[c.id for c in self.corpus.comments],
            terms=list(self.corpus.vocabulary.terms),
            metadata={
                "topics": config.topics,
                "alpha": config.alpha,
                "beta": config.beta,
                "scaling_ratio": state.scaling_ratio,
                "iterations": state.iteration,
                "seed": config.rng_seed,
                "averaged_samples": samples,
            },
        )


# Standalone function wrappers
def init_state(corpus, scores, config):
    """Random initial assignments with popularity-weighted count tables."""
    return GibbsSampler(corpus, scores, config).init_state()


def exclude_token(state: SamplerState, t: int):
    """Remove token t's weight from the tables (the leave-one-out step)."""
    k, w, c, weight = state.z[t], state.words[t], state.docs[t], state.omega[t]
    state.n_kw[k, w] = max(state.n_kw[k, w] - weight, 0.0)
    state.n_kc[c, k] = max(state.n_kc[c, k] - weight, 0.0)
    state.n_k[k] = max(state.n_k[k] - weight, 0.0)


def include_token(state: SamplerState, t: int, k: int):
    """Assign token t to topic k and add its weight back."""
    w, c, weight = state.words[t], state.docs[t], state.omega[t]
    state.z[t] = k
    state.n_kw[k, w] += weight
    state.n_kc[c, k] += weight
    state.n_k[k] += weight


def conditional_distribution(state: SamplerState, t: int) -> np.ndarray:
    """Unnormalized topic weights for token t; its own weight must already be excluded."""
    cfg = state.config
    c, w = state.docs[t], state.words[t]
    vbeta = state.vocab_size * cfg.beta
    return (state.n_kc[c] + cfg.alpha) * (state.n_kw[:, w] + cfg.beta) / (state.n_k + vbeta)


def sweep(state: SamplerState) -> float:
    """One Gibbs iteration over every token; returns the log-probability of the chosen topics."""
    cfg = state.config
    uniforms = state.rng.random(state.n_tokens)
    buf = np.empty(state.n_topics, dtype=np.float64)
    log_likelihood = _sweep(state.words, state.docs, state.omega, state.z, state.n_kw, state.n_kc,
                            state.n_k, cfg.alpha, cfg.beta, state.vocab_size * cfg.beta, uniforms, buf)
    state.iteration += 1
    return float(log_likelihood)


def run(corpus, scores, config, resume_from: Optional[SamplerState] = None, return_state=False):
    """Fit a model; optionally continue an existing chain."""
    sampler = GibbsSampler(corpus, scores, config)
    if resume_from is not None:
        resume_from.config = config
        sampler.state = resume_from
    model = sampler.fit()
    if return_state:
        return model, sampler.state
    return model


def run_chains(corpus, scores, config: SamplerConfig, seeds: Sequence[int], max_workers=None) -> List[TopicModel]:
    """Independent chains, one per seed, on the shared read-only corpus."""
    configs = [config.model_copy(update={"rng_seed": seed, "progress": False}) for seed in seeds]
    with ThreadPoolExecutor(max_workers=max_workers or len(configs) or 1) as executor:
        return list(executor.map(lambda cfg: run(corpus, scores, cfg), configs))


def estimate_phi(state: SamplerState) -> np.ndarray:
    """phi[k, w] proportional to n_kw[k, w] + beta."""
    smoothed = state.n_kw + state.config.beta
    return smoothed / smoothed.sum(axis=1, keepdims=True)


def estimate_theta(state: SamplerState) -> np.ndarray:
    """theta[c, k] proportional to n_kc[c, k] + alpha."""
    smoothed = state.n_kc + state.config.alpha
    return smoothed / smoothed.sum(axis=1, keepdims=True)


def top_words(phi: np.ndarray, vocabulary: Vocabulary, T=10) -> List[List[str]]:
    """T terms per topic by descending probability, ties to the lower vocabulary index."""
    n_terms = min(max(T, 0), phi.shape[1])
    indices = np.arange(phi.shape[1])
    result = []
    for row in phi:
        order = np.lexsort((indices, -row))[:n_terms]
        result.append([vocabulary.term(int(i)) for i in order])
    return result


def audit_counts(state: SamplerState) -> float:
    """Largest absolute gap between the incremental tables and a rebuild from (z, omega)."""
    n_kw = np.zeros_like(state.n_kw)
    n_kc = np.zeros_like(state.n_kc)
    n_k = np.zeros_like(state.n_k)
    _accumulate(state.words, state.docs, state.omega, state.z, n_kw, n_kc, n_k)
    gaps = [np.abs(n_kw - state.n_kw), np.abs(n_kc - state.n_kc), np.abs(n_k - state.n_k)]
    return float(max((g.max() if g.size else 0.0) for g in gaps))


def save_checkpoint(state: SamplerState, path):
    """Persist everything needed to continue the chain bit-identically.

    Written as an npz archive with fixed entry timestamps so reruns are byte-identical.
    """
    meta = {
        "config": state.config.model_dump(),
        "scaling_ratio": state.scaling_ratio,
        "iteration": state.iteration,
        "rng_state": state.rng.bit_generator.state,
        "log_likelihood": state.log_likelihood,
    }
    arrays = {
        "words": state.words, "docs": state.docs, "omega": state.omega, "z": state.z,
        "n_kw": state.n_kw, "n_kc": state.n_kc, "n_k": state.n_k,
        "meta": np.array(json.dumps(meta, sort_keys=True)),
    }
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as archive:
        for name, array in arrays.items():
            buffer = io.BytesIO()
            np.lib.format.write_array(buffer, np.asarray(array), allow_pickle=False)
            info = zipfile.ZipInfo(f"{name}.npy", date_time=CHECKPOINT_TIMESTAMP)
            info.compress_type = zipfile.ZIP_DEFLATED
            archive.writestr(info, buffer.getvalue())
    logger.info(f"Saved checkpoint at iteration {state.iteration} to {path}")


def load_checkpoint(path) -> SamplerState:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        config = SamplerConfig(**meta["config"])
        rng = np.random.default_rng()
        rng.bit_generator.state = meta["rng_state"]
        state = SamplerState(data["words"], data["docs"], data["omega"], data["z"], data["n_kw"],
                             data["n_kc"], data["n_k"], config, meta["scaling_ratio"], rng,
                             iteration=meta["iteration"])
    state.log_likelihood = list(meta.get("log_likelihood", []))
    return state
