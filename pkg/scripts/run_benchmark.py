#!/usr/bin/env python3
"""
Synthetic Benchmark Runner
Runs CSATM and the LDA baseline on planted-topic threads over many seeds
and checks the accuracy gain and the C_NPMI ordering.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import load_run_config  # noqa: E402
from commands.report import cmd_report  # noqa: E402
from utils.logging_utils import setup_logging  # noqa: E402

MIN_ACCURACY_GAIN = 0.05
MIN_NPMI_WINS = 7


def main():
    parser = argparse.ArgumentParser(description='Compare CSATM against the LDA baseline on synthetic threads')
    parser.add_argument('--config', help='KEY=VALUE run-config file')
    parser.add_argument('--seeds', type=int, default=10, help='Number of seeds (0..N-1)')
    parser.add_argument('--topics', type=int, default=4, help='Topics to fit')
    parser.add_argument('--iterations', type=int, default=300)
    parser.add_argument('--burn-in', type=int, default=100)
    parser.add_argument('--output-dir', default='benchmark_output')
    parser.add_argument('--log-file', help='Log file path (logs to stdout if not specified)')
    args = parser.parse_args()

    config = load_run_config(args.config, {
        'topics': args.topics,
        'iterations': args.iterations,
        'burn_in': args.burn_in,
        'output_dir': args.output_dir,
        'log_file': args.log_file,
        'log_every': 0,
    })
    setup_logging(config.log_level, config.log_file)

    print(f"\nSynthetic benchmark: {args.seeds} seeds, K={config.sampler.topics}, "
          f"{config.synthetic.n_threads} threads x {config.synthetic.comments_per_thread} comments")
    print("=" * 80)

    result = cmd_report(config, seeds=list(range(args.seeds)))
    if not result['success']:
        print(f"\nBenchmark failed: {result['error']}")
        sys.exit(1)

    print(result['table'])
    gain = result.get('accuracy_gain', 0.0)
    print(f"\nAccuracy gain (CSATM - LDA): {gain * 100:.1f} pp (need >= {MIN_ACCURACY_GAIN * 100:.0f})")
    print(f"C_NPMI CSATM >= LDA in {result['npmi_wins']} of {args.seeds} seeds (need >= {MIN_NPMI_WINS})")
    print(f"Results saved to: {result['path']}")

    if gain < MIN_ACCURACY_GAIN or result['npmi_wins'] < MIN_NPMI_WINS * args.seeds / 10:
        sys.exit(1)


if __name__ == '__main__':
    main()
