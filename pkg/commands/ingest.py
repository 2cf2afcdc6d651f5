import logging
import os

from commands import command, ensure_output_dir, load_corpus
from services.popularity import PopularityScorer, popularity_rows
from services.thread_parser import level_histogram, trees_to_records
from utils.artifacts import write_csv, write_json, write_jsonl, write_popularity
from utils.logging_utils import log_event

logger = logging.getLogger(__name__)


@command
def cmd_ingest(config):
    """Validate the input threads and write the cleaned trees, parse report and level histogram"""
    corpus, report = load_corpus(config)
    out = ensure_output_dir(config.output_dir)

    write_jsonl(os.path.join(out, "threads.jsonl"), trees_to_records(corpus.trees))
    write_json(os.path.join(out, "parse_report.json"), report.to_dict())
    write_csv(os.path.join(out, "levels.csv"), ["thread_id", "level", "comments"], (
        {"thread_id": tree.thread_id, "level": level, "comments": count}
        for tree in corpus.trees for level, count in level_histogram(tree).items()
    ))

    scores = PopularityScorer(config.weights).score_corpus(corpus)
    write_popularity(os.path.join(out, "popularity.csv"), popularity_rows(corpus, scores))

    log_event(logger, 'info', "Ingest complete", threads=len(corpus.trees), comments=corpus.n_comments,
              tokens=corpus.n_tokens, vocab=len(corpus.vocabulary), output=out)
    return {
        "success": True,
        "threads": len(corpus.trees),
        "comments": corpus.n_comments,
        "tokens": corpus.n_tokens,
        "vocabulary": len(corpus.vocabulary),
        "report": report.to_dict(),
    }
