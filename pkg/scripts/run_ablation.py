#!/usr/bin/env python3
"""Feature-ablation experiment: per-class precision/recall@k for each of the
histogram, color-moment, shape-invariant and fused distances over one corpus.

Prints a markdown comparison table (classes x features) and optionally dumps
one CSV per feature.
"""

import argparse
import sys
import time
from pathlib import Path

from cbir.cli import discover_corpus
from cbir.evaluation import CSV, FEATURES, evaluate_ablations, render_report
from cbir.imaging import DecodeError, decode_image
from cbir.index import MINMAX, RAW, build_index


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("data", type=Path, help="corpus root (folders layout)")
    parser.add_argument("--top", type=int, default=20)
    parser.add_argument("--mode", choices=["raw", "minmax"], default="minmax")
    parser.add_argument("--layout", choices=["folders", "corel"], default="folders")
    parser.add_argument("--out-dir", type=Path, default=None, help="write per-feature CSVs here")
    args = parser.parse_args()

    entries = discover_corpus(args.data, args.layout)
    if not entries:
        sys.exit("no images found")
    corpus = []
    t0 = time.perf_counter()
    for entry in entries:
        try:
            corpus.append(
                (entry.id, entry.label, entry.rel_path, decode_image(entry.path.read_bytes()))
            )
        except DecodeError as exc:
            print(f"skipping {entry.rel_path}: {exc}", file=sys.stderr)
    mode = MINMAX if args.mode == "minmax" else RAW
    index = build_index(corpus, mode)
    print(f"indexed {len(index)} images in {time.perf_counter() - t0:.1f} s ({mode})")

    t0 = time.perf_counter()
    reports = evaluate_ablations(index, args.top, mode=mode)
    print(f"evaluated 4 x {len(index)} queries in {time.perf_counter() - t0:.1f} s\n")

    classes = [row.name for row in reports["fused"].rows]
    header = "| class | " + " | ".join(FEATURES) + " |"
    print(header)
    print("|" + " --- |" * (len(FEATURES) + 1))
    per_feature = {
        feat: {row.name: row.precision for row in reports[feat].rows} for feat in FEATURES
    }
    for name in classes:
        cells = " | ".join(f"{per_feature[feat][name]:.1f}" for feat in FEATURES)
        print(f"| {name} | {cells} |")
    means = " | ".join(f"{reports[feat].mean_precision:.1f}" for feat in FEATURES)
    print(f"| mean | {means} |")
    recalls = " | ".join(f"{reports[feat].mean_recall:.1f}" for feat in FEATURES)
    print(f"| mean recall | {recalls} |")

    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        for feat, report in reports.items():
            dest = args.out_dir / f"ablation-{feat}-k{args.top}.csv"
            dest.write_text(render_report(report, CSV), encoding="utf-8")
        print(f"\nwrote CSVs to {args.out_dir}")


if __name__ == "__main__":
    main()
