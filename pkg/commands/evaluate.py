import logging
import os
from typing import Dict, List, Optional, Sequence

from commands import command, ensure_output_dir, safe_name
from commands.assign import ASSIGNMENTS_FILE
from commands.train import thread_model_dirs
from models import CoherenceReport, TopicModel
from services.coherence import CoherenceIndex, build_index, evaluate_model, needed_terms, read_reference_corpus
from services.synthetic import assignment_accuracy
from services.thread_parser import Tokenizer
from utils.artifacts import load_model, read_jsonl, read_truth, write_coherence_report, write_json
from utils.logging_utils import log_event

logger = logging.getLogger(__name__)


def reference_index(config, models: Sequence[TopicModel],
                    documents: Optional[List[List[str]]] = None) -> CoherenceIndex:
    """Index the reference corpus for every top term of ``models``"""
    terms = sorted({term for model in models for term in needed_terms(model, config.top_t)})
    if documents is None:
        config.require_paths("reference_path")
        documents = read_reference_corpus(config.reference_path, Tokenizer(config.tokenizer))
    return build_index(documents, terms, config.window_sizes, progress=config.sampler.progress)


def labels_from_file(path) -> Dict[str, int]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Assignments not found (run assign first): {path}")
    return {record["comment_id"]: int(record["topic"]) for record in read_jsonl(path)}


@command
def cmd_evaluate(config):
    """Write coherence.csv (six measures per topic plus averages) and accuracy when truth is given"""
    out = ensure_output_dir(config.output_dir)
    if config.truth_path:
        config.require_paths("truth_path")

    if config.mode == "thread":
        named = [(thread_id, load_model(directory)) for thread_id, directory in thread_model_dirs(config)]
    else:
        model_dir = config.resolved_model_dir
        if not os.path.isdir(model_dir):
            raise FileNotFoundError(f"Model directory does not exist: {model_dir}")
        named = [(None, load_model(model_dir))]

    index = reference_index(config, [model for _, model in named])
    reports: Dict[str, CoherenceReport] = {}
    for thread_id, model in named:
        report = evaluate_model(model, index, config.top_t)
        name = "coherence.csv" if thread_id is None else f"coherence_{safe_name(thread_id)}.csv"
        write_coherence_report(os.path.join(out, name), report)
        reports[thread_id or "corpus"] = report

    result = {"success": True, "averages": {key: report.averages for key, report in reports.items()}}
    if config.truth_path:
        truth = read_truth(config.truth_path)
        accuracy = assignment_accuracy(labels_from_file(os.path.join(out, ASSIGNMENTS_FILE)), truth)
        write_json(os.path.join(out, "accuracy.json"), {"accuracy": accuracy, "comments": len(truth)})
        result["accuracy"] = accuracy

    log_event(logger, 'info', "Evaluation complete", models=len(reports), accuracy=result.get("accuracy"))
    return result
