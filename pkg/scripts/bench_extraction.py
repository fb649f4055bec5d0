#!/usr/bin/env python3
"""Extraction-time experiment: per-image wall clock with and without decode
and resize, reported as mean/median/p95 over repeated passes.
"""

import argparse
import sys
from pathlib import Path

from cbir.cli import discover_corpus
from cbir.evaluation import benchmark_extraction, render_timing_report


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("data", type=Path, help="corpus root")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--limit", type=int, default=None, help="cap the image count")
    args = parser.parse_args()

    entries = discover_corpus(args.data, "folders")
    if not entries:
        sys.exit("no images found")
    paths = [e.path for e in entries[: args.limit]]
    report = benchmark_extraction(paths, repeats=args.repeat)
    sys.stdout.write(render_timing_report(report))


if __name__ == "__main__":
    main()
