import logging
import os
from typing import Dict, List, Optional, Sequence

from tqdm import tqdm

from commands import command, ensure_output_dir, load_corpus
from commands.assign import assign_with_model
from commands.evaluate import reference_index
from commands.train import popularity_scores
from models import MEASURES, GroundTruth
from services.coherence import evaluate_model
from services.sampler import run
from services.synthetic import SyntheticGenerator, assignment_accuracy
from utils.artifacts import read_truth, write_csv
from utils.logging_utils import log_event

logger = logging.getLogger(__name__)

METHODS = ("csatm", "lda")
REPORT_FILE = "report.csv"


def method_config(config, method: str, seed: int):
    """Copy of ``config`` for one side of the comparison; only popularity handling differs"""
    lda = method == "lda"
    scaling = 1.0 if lda else (None if config.lda_baseline else config.sampler.scaling_ratio)
    sampler = config.sampler.model_copy(update={"rng_seed": seed, "scaling_ratio": scaling, "progress": False})
    return config.model_copy(update={"lda_baseline": lda, "sampler": sampler})


def benchmark_seed(config, seed: int) -> List[Dict]:
    """Train, assign and evaluate both methods on one seed; one row per method"""
    documents = None
    truth: Optional[GroundTruth] = None
    if config.input_path:
        corpus, _ = load_corpus(config)
        if config.truth_path:
            truth = read_truth(config.truth_path)
    else:
        generator = SyntheticGenerator(config.synthetic.model_copy(update={"rng_seed": seed}))
        corpus, truth = generator.generate()
        documents = generator.reference_documents(config.synth_reference_docs)

    fitted = {}
    for method in METHODS:
        cfg = method_config(config, method, seed)
        model = run(corpus, popularity_scores(corpus, cfg), cfg.sampler)
        fitted[method] = (cfg, model)

    index = reference_index(config, [model for _, model in fitted.values()], documents)
    rows = []
    for method, (cfg, model) in fitted.items():
        averages = evaluate_model(model, index, config.top_t).averages
        accuracy = None
        if truth is not None:
            accuracy = assignment_accuracy(assign_with_model(model, corpus, cfg), truth)
        rows.append({"seed": seed, "method": method, "accuracy": accuracy, **averages})
    return rows


def summarize(rows: Sequence[Dict]) -> List[Dict]:
    """Mean of every column per method"""
    summary = []
    for method in METHODS:
        subset = [row for row in rows if row["method"] == method]
        if not subset:
            continue
        mean = {"seed": "MEAN", "method": method}
        for key in ("accuracy",) + MEASURES:
            values = [row[key] for row in subset if row[key] is not None]
            mean[key] = sum(values) / len(values) if values else None
        summary.append(mean)
    return summary


def npmi_wins(rows: Sequence[Dict]) -> int:
    """Seeds where the CSATM averaged C_NPMI is at least the baseline's"""
    by_seed: Dict = {}
    for row in rows:
        by_seed.setdefault(row["seed"], {})[row["method"]] = row["c_npmi"]
    return sum(1 for pair in by_seed.values() if len(pair) == 2 and pair["csatm"] >= pair["lda"])


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def format_table(rows: Sequence[Dict]) -> str:
    columns = ["seed", "method", "accuracy"] + list(MEASURES)
    cells = [[_cell(row[c]) for c in columns] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(v.ljust(w) for v, w in zip(r, widths)) for r in cells)
    return "\n".join(lines)


@command
def cmd_report(config, seeds: Optional[Sequence[int]] = None):
    """CSATM vs LDA baseline: accuracy and averaged coherence per seed, written to report.csv"""
    out = ensure_output_dir(config.output_dir)
    seeds = list(seeds) if seeds else [config.sampler.rng_seed]
    if not config.input_path and config.synth_reference_docs == 0:
        raise ValueError("synth_reference_docs must be positive for a synthetic report")

    rows: List[Dict] = []
    for seed in tqdm(seeds, desc="Benchmark seeds", disable=not config.sampler.progress):
        seed_rows = benchmark_seed(config, seed)
        rows.extend(seed_rows)
        for row in seed_rows:
            log_event(logger, 'info', "Benchmark result", seed=seed, method=row["method"],
                      accuracy=_cell(row["accuracy"]), c_npmi=_cell(row["c_npmi"]))

    summary = summarize(rows)
    table_rows = rows + summary
    write_csv(os.path.join(out, REPORT_FILE), ["seed", "method", "accuracy"] + list(MEASURES),
              ({k: _cell(v) for k, v in row.items()} for row in table_rows))

    wins = npmi_wins(rows)
    means = {row["method"]: row for row in summary}
    result = {
        "success": True,
        "seeds": seeds,
        "rows": rows,
        "summary": summary,
        "npmi_wins": wins,
        "table": format_table(table_rows),
        "path": os.path.join(out, REPORT_FILE),
    }
    if means.get("csatm", {}).get("accuracy") is not None and means.get("lda", {}).get("accuracy") is not None:
        result["accuracy_gain"] = means["csatm"]["accuracy"] - means["lda"]["accuracy"]
    log_event(logger, 'info', "Report complete", seeds=len(seeds), npmi_wins=wins,
              accuracy_gain=_cell(result.get("accuracy_gain")))
    return result
