#!/usr/bin/env python3
"""Generate a synthetic labeled corpus in folders layout.

Ten classes pair three shapes with three near-equal-luma palettes plus one
class unique in both hue and shape, mirroring the 10x100 benchmark setup.
"""

import argparse
from pathlib import Path

from cbir.synthetic import generate_corpus_files


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("dest", type=Path, help="output directory")
    parser.add_argument("--per-class", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    written = generate_corpus_files(args.dest, per_class=args.per_class, seed=args.seed)
    print(f"wrote {len(written)} images under {args.dest}")


if __name__ == "__main__":
    main()
