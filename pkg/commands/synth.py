import logging
import os

from commands import command, ensure_output_dir
from services.synthetic import SyntheticGenerator
from utils.artifacts import write_jsonl, write_truth
from utils.logging_utils import log_event

logger = logging.getLogger(__name__)

THREADS_FILE = "synthetic_threads.jsonl"
TRUTH_FILE = "truth.csv"
REFERENCE_FILE = "reference.txt"


def write_reference(path, documents):
    """One space-joined document per line"""
    with open(path, "w", encoding="utf-8") as f:
        for tokens in documents:
            f.write(" ".join(tokens) + "\n")


@command
def cmd_synth(config):
    """Generate a planted-topic dataset: threads, ground truth and a reference corpus"""
    out = ensure_output_dir(config.output_dir)
    generator = SyntheticGenerator(config.synthetic)
    records, truth = generator.generate_records()

    paths = {
        "threads": os.path.join(out, THREADS_FILE),
        "truth": os.path.join(out, TRUTH_FILE),
        "reference": os.path.join(out, REFERENCE_FILE),
    }
    write_jsonl(paths["threads"], records)
    write_truth(paths["truth"], truth)
    write_reference(paths["reference"], generator.reference_documents(config.synth_reference_docs))

    log_event(logger, 'info', "Synthetic dataset written", threads=config.synthetic.n_threads,
              comments=len(records), topics=config.synthetic.k_true, seed=config.synthetic.rng_seed)
    return {"success": True, "comments": len(records), "threads": config.synthetic.n_threads, **paths}
