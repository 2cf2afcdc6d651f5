import json
import logging
import os
from typing import Dict, List, Optional, Tuple

from commands import command, ensure_output_dir, load_corpus, safe_name
from config import run_config_dump
from models import Corpus, TopicModel
from services.popularity import PopularityScorer, popularity_rows
from services.sampler import lda_baseline_scores, load_checkpoint, run, save_checkpoint
from utils.artifacts import save_model, write_json, write_popularity
from utils.logging_utils import log_event

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "checkpoint.npz"
THREAD_INDEX_FILE = "threads.json"


def popularity_scores(corpus: Corpus, config) -> Dict[str, float]:
    """Popularity per comment, or all ones for the LDA baseline"""
    if config.lda_baseline:
        return lda_baseline_scores(corpus)
    return PopularityScorer(config.weights).score_corpus(corpus)


def thread_model_dir(config, thread_id: str) -> str:
    return os.path.join(config.resolved_model_dir, "threads", safe_name(thread_id))


def thread_model_dirs(config) -> List[Tuple[str, str]]:
    """(thread_id, model dir) pairs written by a per-thread training run"""
    index_path = os.path.join(config.resolved_model_dir, THREAD_INDEX_FILE)
    if not os.path.exists(index_path):
        raise FileNotFoundError(f"Per-thread model index not found: {index_path}")
    with open(index_path, encoding="utf-8") as f:
        entries = json.load(f)
    return [(entry["thread_id"], entry["model_dir"]) for entry in entries]


def train_corpus(corpus: Corpus, scores: Dict[str, float], config, resume_from: Optional[str] = None):
    """Fit one model over the whole corpus; returns (model, final sampler state)."""
    state = None
    if resume_from:
        if not os.path.exists(resume_from):
            raise FileNotFoundError(f"Checkpoint does not exist: {resume_from}")
        state = load_checkpoint(resume_from)
        if state.n_comments != corpus.n_comments or state.n_tokens != corpus.n_tokens:
            raise ValueError(f"Checkpoint {resume_from} was written for a different corpus "
                             f"({state.n_comments} comments, {state.n_tokens} tokens)")
        if state.n_topics != config.sampler.topics:
            raise ValueError(f"Checkpoint has {state.n_topics} topics, config asks for {config.sampler.topics}")
        if state.iteration > config.sampler.iterations:
            raise ValueError(f"Checkpoint is already at iteration {state.iteration}, "
                             f"beyond the configured {config.sampler.iterations}")
        logger.info(f"Resuming chain from {resume_from} at iteration {state.iteration}")
    return run(corpus, scores, config.sampler, resume_from=state, return_state=True)


def train_threads(corpus: Corpus, scores: Dict[str, float], config) -> Dict[str, TopicModel]:
    """One small model per thread, each with ``thread_topics`` topics."""
    sampler_config = config.sampler.model_copy(update={"topics": config.thread_topics, "progress": False})
    checkpoints = ensure_output_dir(os.path.join(config.output_dir, "checkpoints"))
    models = {}
    index = []
    for tree in corpus.trees:
        sub = corpus.subcorpus(tree.thread_id)
        model, state = run(sub, scores, sampler_config, return_state=True)
        directory = thread_model_dir(config, tree.thread_id)
        save_model(model, directory)
        save_checkpoint(state, os.path.join(checkpoints, f"{safe_name(tree.thread_id)}.npz"))
        models[tree.thread_id] = model
        index.append({"thread_id": tree.thread_id, "model_dir": directory})
    write_json(os.path.join(config.resolved_model_dir, THREAD_INDEX_FILE), index)
    return models


@command
def cmd_train(config, resume_from: Optional[str] = None):
    """Fit the topic model and write model, popularity scores and checkpoint"""
    corpus, _ = load_corpus(config)
    out = ensure_output_dir(config.output_dir)
    scores = popularity_scores(corpus, config)
    write_popularity(os.path.join(out, "popularity.csv"), popularity_rows(corpus, scores))
    write_json(os.path.join(out, "run_config.json"), run_config_dump(config))

    if config.mode == "thread":
        if resume_from:
            raise ValueError("Resuming is only supported in corpus mode")
        models = train_threads(corpus, scores, config)
        log_event(logger, 'info', "Per-thread training complete", threads=len(models),
                  topics=config.thread_topics, lda_baseline=config.lda_baseline)
        return {"success": True, "mode": "thread", "threads": len(models),
                "model_dir": config.resolved_model_dir}

    model, state = train_corpus(corpus, scores, config, resume_from)
    save_model(model, config.resolved_model_dir)
    save_checkpoint(state, os.path.join(out, CHECKPOINT_FILE))
    log_event(logger, 'info', "Training complete", topics=model.n_topics, comments=corpus.n_comments,
              iterations=state.iteration, scaling_ratio=f"{state.scaling_ratio:.6f}",
              lda_baseline=config.lda_baseline)
    return {
        "success": True,
        "mode": "corpus",
        "topics": model.n_topics,
        "comments": corpus.n_comments,
        "vocabulary": len(corpus.vocabulary),
        "iterations": state.iteration,
        "model_dir": config.resolved_model_dir,
        "top_words": model.top_words,
    }
