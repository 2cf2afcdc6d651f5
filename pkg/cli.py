#!/usr/bin/env python3
"""Command-line entry point: ingest, train, assign, evaluate, synth and report."""

import argparse
import json
import logging
import sys

from pydantic import ValidationError

from config import load_run_config
from utils.logging_utils import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2

REQUIRED_PATHS = {
    "ingest": ("input_path",),
    "train": ("input_path",),
    "assign": ("input_path",),
    "evaluate": ("reference_path",),
}
OPTIONAL_PATHS = ("input_path", "reference_path", "truth_path")

# argparse dest -> run-config key
FLAG_KEYS = {
    "seed": "seed",
    "topics": "topics",
    "alpha": "alpha",
    "beta": "beta",
    "scaling_ratio": "lambda",
    "weight_seq": "weight_seq",
    "wc": "wc",
    "wd": "wd",
    "wr": "wr",
    "wb": "wb",
    "gravity": "gravity",
    "iterations": "iterations",
    "burn_in": "burn_in",
    "min_descendants": "min_descendants",
    "mode": "mode",
    "input": "input",
    "input_format": "input_format",
    "reference": "reference",
    "truth": "truth",
    "output_dir": "output_dir",
    "model_dir": "model_dir",
    "log_level": "log_level",
    "log_file": "log_file",
}


def parse_seeds(text):
    """'0-9' or '1,2,5'"""
    seeds = []
    for part in text.split(','):
        part = part.strip()
        if not part:
            continue
        if '-' in part:
            start, end = part.split('-', 1)
            seeds.extend(range(int(start), int(end) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise argparse.ArgumentTypeError(f"No seeds in '{text}'")
    return seeds


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='KEY=VALUE run-config file')
    common.add_argument('--input', help='Comment threads (JSON Lines)')
    common.add_argument('--input-format', choices=['generic-jsonl', 'pushshift'])
    common.add_argument('--reference', help='Reference corpus, one document per line')
    common.add_argument('--truth', help='Ground-truth CSV (comment_id, topic)')
    common.add_argument('--output-dir')
    common.add_argument('--model-dir')
    common.add_argument('--seed', type=int)
    common.add_argument('--topics', type=int)
    common.add_argument('--alpha', type=float)
    common.add_argument('--beta', type=float)
    common.add_argument('--lambda', dest='scaling_ratio', help="'auto' or a positive float")
    common.add_argument('--weight-seq', choices=['arithmetic', 'geometric', 'harmonic'])
    common.add_argument('--wc', type=float)
    common.add_argument('--wd', type=float)
    common.add_argument('--wr', type=float)
    common.add_argument('--wb', type=float)
    common.add_argument('--gravity', type=float)
    common.add_argument('--iterations', type=int)
    common.add_argument('--burn-in', type=int)
    common.add_argument('--min-descendants', type=int)
    common.add_argument('--lda-baseline', action='store_true', default=None,
                        help='Uniform popularity and lambda=1 (plain LDA)')
    common.add_argument('--mode', choices=['corpus', 'thread'])
    common.add_argument('--no-progress', action='store_true', help='Disable progress bars')
    common.add_argument('--log-level')
    common.add_argument('--log-file')

    parser = argparse.ArgumentParser(
        prog='csatm',
        description='Conversation-structure-aware topic modeling for comment threads')
    subparsers = parser.add_subparsers(dest='command', required=True)

    subparsers.add_parser('ingest', parents=[common], help='Validate threads and write cleaned trees')
    train = subparsers.add_parser('train', parents=[common], help='Fit the topic model')
    train.add_argument('--resume', help='Continue from a checkpoint .npz')
    subparsers.add_parser('assign', parents=[common], help='Label every comment with one topic')
    subparsers.add_parser('evaluate', parents=[common], help='Coherence report and accuracy')
    subparsers.add_parser('synth', parents=[common], help='Generate a planted-topic dataset')
    report = subparsers.add_parser('report', parents=[common], help='CSATM vs LDA baseline table')
    report.add_argument('--seeds', type=parse_seeds, help="Seed list, e.g. '0-9' or '1,4,7'")
    return parser


def overrides_from_args(args):
    overrides = {key: getattr(args, dest) for dest, key in FLAG_KEYS.items() if getattr(args, dest, None) is not None}
    if args.lda_baseline:
        overrides['lda_baseline'] = 'true'
    if args.no_progress:
        overrides['progress'] = 'false'
    return overrides


def check_launch_paths(command, config):
    """Every input path a command reads must exist before any work starts"""
    if command == "synth":
        return
    config.require_paths(*REQUIRED_PATHS.get(command, ()))
    config.require_paths(*(name for name in OPTIONAL_PATHS if getattr(config, name)))


def dispatch(args, config):
    from commands.assign import cmd_assign
    from commands.evaluate import cmd_evaluate
    from commands.ingest import cmd_ingest
    from commands.report import cmd_report
    from commands.synth import cmd_synth
    from commands.train import cmd_train

    if args.command == 'ingest':
        return cmd_ingest(config)
    if args.command == 'train':
        return cmd_train(config, resume_from=args.resume)
    if args.command == 'assign':
        return cmd_assign(config)
    if args.command == 'evaluate':
        return cmd_evaluate(config)
    if args.command == 'synth':
        return cmd_synth(config)
    return cmd_report(config, seeds=args.seeds)


def main(argv=None):
    args = build_parser().parse_args(argv)

    try:
        config = load_run_config(args.config, overrides_from_args(args))
        check_launch_paths(args.command, config)
    except (ValidationError, ValueError, KeyError, FileNotFoundError) as e:
        setup_logging()
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INPUT

    setup_logging(config.log_level, config.log_file)
    logger.info(f"Running '{args.command}' (seed={config.sampler.rng_seed}, output_dir={config.output_dir})")

    result = dispatch(args, config)
    if not result.get('success'):
        return EXIT_INPUT if result.get('kind') == 'input' else EXIT_INTERNAL

    table = result.pop('table', None)
    if table:
        print(table)
    else:
        print(json.dumps(result, indent=2, default=str))
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
