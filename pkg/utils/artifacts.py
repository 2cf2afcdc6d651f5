"""Readers and writers for run artifacts: CSV tables, JSON Lines and model bundles."""

import csv
import json
import logging
import os
from typing import Dict, Iterable, List, Sequence

import numpy as np

from models import CoherenceReport, GroundTruth, MEASURES, TopicAssignment, TopicModel

logger = logging.getLogger(__name__)

PHI_FILE = "phi.csv"
THETA_FILE = "theta.csv"
TOP_WORDS_FILE = "top_words.json"
MODEL_META_FILE = "model.json"


def write_csv(path, fieldnames: Sequence[str], rows: Iterable[dict]):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_csv(path) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def write_jsonl(path, records: Iterable[dict]):
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_jsonl(path) -> List[dict]:
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def write_json(path, data):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def save_model(model: TopicModel, directory):
    """phi.csv (topic, term, probability), theta.csv (comment_id, topic, probability), top words, metadata"""
    os.makedirs(directory, exist_ok=True)
    write_csv(os.path.join(directory, PHI_FILE), ["topic", "term", "probability"], (
        {"topic": k, "term": term, "probability": repr(float(p))}
        for k, row in enumerate(model.phi) for term, p in zip(model.terms, row)
    ))
    write_csv(os.path.join(directory, THETA_FILE), ["comment_id", "topic", "probability"], (
        {"comment_id": comment_id, "topic": k, "probability": repr(float(p))}
        for comment_id, row in zip(model.comment_ids, model.theta) for k, p in enumerate(row)
    ))
    write_json(os.path.join(directory, TOP_WORDS_FILE),
               [{"topic": k, "words": words} for k, words in enumerate(model.top_words)])
    write_json(os.path.join(directory, MODEL_META_FILE), model.metadata)
    logger.info(f"Saved model ({model.phi.shape[0]} topics) to {directory}")


def load_model(directory) -> TopicModel:
    for name in (PHI_FILE, THETA_FILE):
        if not os.path.exists(os.path.join(directory, name)):
            raise FileNotFoundError(f"Model file not found: {os.path.join(directory, name)}")

    with open(os.path.join(directory, MODEL_META_FILE), encoding="utf-8") as f:
        metadata = json.load(f)

    terms: List[str] = []
    phi_rows: Dict[int, List[float]] = {}
    for row in read_csv(os.path.join(directory, PHI_FILE)):
        k = int(row["topic"])
        if k == 0:
            terms.append(row["term"])
        phi_rows.setdefault(k, []).append(float(row["probability"]))

    comment_ids: List[str] = []
    theta_rows: Dict[str, List[float]] = {}
    for row in read_csv(os.path.join(directory, THETA_FILE)):
        if row["comment_id"] not in theta_rows:
            comment_ids.append(row["comment_id"])
        theta_rows.setdefault(row["comment_id"], []).append(float(row["probability"]))

    n_topics = int(metadata.get("topics", len(phi_rows)))
    phi = np.array([phi_rows.get(k, [1.0 / max(len(terms), 1)] * len(terms)) for k in range(n_topics)],
                   dtype=np.float64).reshape(n_topics, len(terms))
    theta = np.array([theta_rows[c] for c in comment_ids], dtype=np.float64).reshape(len(comment_ids), n_topics)

    top_words_path = os.path.join(directory, TOP_WORDS_FILE)
    top_words = []
    if os.path.exists(top_words_path):
        with open(top_words_path, encoding="utf-8") as f:
            top_words = [entry["words"] for entry in json.load(f)]
    return TopicModel(phi=phi, theta=theta, top_words=top_words, comment_ids=comment_ids,
                      terms=terms, metadata=metadata)


def write_assignments(path, assignments: Sequence[TopicAssignment]):
    write_jsonl(path, (a.to_dict() for a in assignments))


def write_popularity(path, rows: Iterable[dict]):
    write_csv(path, ["comment_id", "thread_id", "popularity"],
              ({**row, "popularity": repr(float(row["popularity"]))} for row in rows))


def write_coherence_report(path, report: CoherenceReport):
    """One row per topic plus a final AVERAGE row"""
    fieldnames = ["topic"] + list(MEASURES)
    rows = [{"topic": k, **{m: f"{row[m]:.6f}" for m in MEASURES}} for k, row in enumerate(report.rows)]
    averages = report.averages
    rows.append({"topic": "AVERAGE", **{m: f"{averages[m]:.6f}" for m in MEASURES}})
    write_csv(path, fieldnames, rows)


def write_truth(path, truth: GroundTruth):
    write_csv(path, ["comment_id", "topic"],
              ({"comment_id": cid, "topic": topic} for cid, topic in truth.labels.items()))


def read_truth(path) -> GroundTruth:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Truth file not found: {path}")
    return GroundTruth({row["comment_id"]: int(row["topic"]) for row in read_csv(path)})
