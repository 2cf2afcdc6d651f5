import logging
import os
from typing import List

from commands import command, ensure_output_dir, load_corpus
from commands.train import thread_model_dirs
from models import Corpus, TopicAssignment
from services.assignment import TopicAssigner, raw_assignments
from utils.artifacts import load_model, write_assignments
from utils.logging_utils import log_event

logger = logging.getLogger(__name__)

ASSIGNMENTS_FILE = "assignments.jsonl"


def assign_with_model(model, corpus: Corpus, config) -> List[TopicAssignment]:
    """Blended labels, or raw argmax labels for the LDA baseline"""
    if config.lda_baseline:
        return raw_assignments(model, corpus)
    return TopicAssigner(config.blend_weights).assign_all(model, corpus)


@command
def cmd_assign(config):
    """Label every comment with one topic and write assignments.jsonl"""
    corpus, _ = load_corpus(config)
    out = ensure_output_dir(config.output_dir)

    if config.mode == "thread":
        assignments = []
        for thread_id, directory in thread_model_dirs(config):
            assignments.extend(assign_with_model(load_model(directory), corpus.subcorpus(thread_id), config))
    else:
        model_dir = config.resolved_model_dir
        if not os.path.isdir(model_dir):
            raise FileNotFoundError(f"Model directory does not exist: {model_dir}")
        assignments = assign_with_model(load_model(model_dir), corpus, config)

    path = os.path.join(out, ASSIGNMENTS_FILE)
    write_assignments(path, assignments)
    log_event(logger, 'info', "Assignment complete", comments=len(assignments), output=path,
              blended=not config.lda_baseline)
    return {"success": True, "comments": len(assignments), "path": path}
