"""Command-line entry point: index, query, eval, bench and serve.

Exit codes: 0 success, 1 runtime failure, 2 data-format failure, 64 usage
error. Warnings go to stderr; results and reports go to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .descriptors import Descriptor, extract_descriptor
from .evaluation import (
    CSV,
    FEATURES,
    QUERIES_ALL,
    QUERIES_ONE_PER_CLASS,
    UnlabeledRecord,
    benchmark_extraction,
    evaluate,
    render_report,
    render_timing_report,
)
from .imaging import DecodeError, decode_image
from .index import (
    MINMAX,
    RAW,
    FormatError,
    IndexRecord,
    VersionError,
    from_records,
    load_index,
    save_index,
    search_topk,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_FORMAT = 2
EXIT_USAGE = 64

LAYOUT_FOLDERS = "folders"
LAYOUT_COREL = "corel"

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class CorpusEntry:
    id: int
    label: str
    path: Path  # absolute location on disk
    rel_path: str  # stored in the index, relative to the corpus root


def discover_corpus(root: str | Path, layout: str) -> list[CorpusEntry]:
    """Enumerate corpus images with deterministic, lexicographic ordering.

    FOLDERS labels each image with its immediate parent directory name;
    COREL labels numeric filenames with floor(number / 100). Files the
    layout cannot label are reported via ValueError by the caller's choice;
    here they are silently excluded from the listing.
    """
    root = Path(root)
    paths = sorted(
        (p for p in root.rglob("*") if p.suffix.lower() in _IMAGE_SUFFIXES),
        key=lambda p: p.relative_to(root).as_posix(),
    )
    entries = []
    next_id = 0
    for p in paths:
        if layout == LAYOUT_FOLDERS:
            label = p.parent.name if p.parent != root else root.name
        elif layout == LAYOUT_COREL:
            if not p.stem.isdigit():
                continue
            label = str(int(p.stem) // 100)
        else:
            raise ValueError(f"unknown layout {layout!r}")
        entries.append(
            CorpusEntry(
                id=next_id,
                label=label,
                path=p,
                rel_path=p.relative_to(root).as_posix(),
            )
        )
        next_id += 1
    return entries


def _extract_worker(args: tuple[int, str, str, str]) -> tuple[int, str, str, np.ndarray | None, float, str]:
    """Decode and extract one image; errors come back as a message string."""
    entry_id, label, path, rel_path = args
    try:
        blob = Path(path).read_bytes()
        t0 = time.perf_counter()
        img = decode_image(blob)
        desc = extract_descriptor(img)
        elapsed = time.perf_counter() - t0
        return entry_id, label, rel_path, desc.values, elapsed, ""
    except (OSError, DecodeError) as exc:
        return entry_id, label, rel_path, None, 0.0, str(exc)


def _worker_count(flag_value: int | None) -> int:
    if flag_value is not None:
        return max(1, flag_value)
    env = os.environ.get("CBIR_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage failures exit with code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="cbir", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="extract descriptors and write an index file")
    p_index.add_argument("--data", required=True, help="corpus root directory")
    p_index.add_argument("--out", required=True, help="index file to write")
    p_index.add_argument("--layout", choices=[LAYOUT_FOLDERS, LAYOUT_COREL], default=LAYOUT_FOLDERS)
    p_index.add_argument("--mode", choices=["raw", "minmax"], default="minmax")
    p_index.add_argument("--workers", type=int, default=None, help="extraction processes (default: CBIR_WORKERS or all cores)")

    p_query = sub.add_parser("query", help="query an index by example image")
    p_query.add_argument("--index", required=True)
    p_query.add_argument("--image", required=True)
    p_query.add_argument("--top", type=int, default=20)
    p_query.add_argument("--format", choices=["table", "json"], default="table")
    p_query.add_argument("--exclude-self", action="store_true")

    p_eval = sub.add_parser("eval", help="precision/recall sweep over a labeled index")
    p_eval.add_argument("--index", required=True)
    p_eval.add_argument("--top", type=int, default=20)
    p_eval.add_argument("--feature", choices=list(FEATURES), default="fused")
    p_eval.add_argument("--out", required=True, help="CSV report destination")
    p_eval.add_argument("--queries", choices=[QUERIES_ALL, QUERIES_ONE_PER_CLASS], default=QUERIES_ALL)

    p_bench = sub.add_parser("bench", help="time descriptor extraction over a corpus")
    p_bench.add_argument("--data", required=True)
    p_bench.add_argument("--repeat", type=int, default=1)

    p_serve = sub.add_parser("serve", help="serve the HTTP retrieval API")
    p_serve.add_argument("--index", required=True)
    p_serve.add_argument("--images", required=True, help="corpus root the index paths resolve under")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--ui", default=None, help="directory of static UI assets to mount")
    return parser


def cmd_index(args) -> int:
    data = Path(args.data)
    if not data.is_dir():
        print(f"error: data directory not found: {data}", file=sys.stderr)
        return EXIT_RUNTIME
    entries = discover_corpus(data, args.layout)
    if not entries:
        print("error: no images found", file=sys.stderr)
        return EXIT_RUNTIME

    workers = _worker_count(args.workers)
    tasks = [(e.id, e.label, str(e.path), e.rel_path) for e in entries]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_extract_worker, tasks, chunksize=8))
    else:
        results = [_extract_worker(t) for t in tasks]

    records = []
    timings = []
    skipped = 0
    for entry_id, label, rel_path, values, elapsed, err in results:
        if values is None:
            print(f"warning: skipping {rel_path}: {err}", file=sys.stderr)
            skipped += 1
            continue
        records.append(
            IndexRecord(id=entry_id, label=label, path=rel_path, descriptor=Descriptor(values))
        )
        timings.append(elapsed)
    if not records:
        print("error: no images found", file=sys.stderr)
        return EXIT_RUNTIME

    mode = MINMAX if args.mode == "minmax" else RAW
    index = from_records(records, mode)
    try:
        save_index(index, args.out)
    except OSError as exc:
        print(f"error: cannot write index: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if skipped:
        print(f"skipped {skipped} undecodable file(s)", file=sys.stderr)
    print(f"indexed {len(records)} images ({mode}), mean extraction {np.mean(timings):.4f} s/image")
    return EXIT_OK


def _load_index_or_fail(path: str):
    try:
        return load_index(path), EXIT_OK
    except FileNotFoundError:
        print(f"error: index file not found: {path}", file=sys.stderr)
        return None, EXIT_RUNTIME
    except (FormatError, VersionError) as exc:
        print(f"error: bad index file: {exc}", file=sys.stderr)
        return None, EXIT_FORMAT


def _resolve_self_id(index, image_path: Path) -> int | None:
    """Best-effort match of a query file against stored record paths."""
    target = image_path.resolve()
    matches = [
        rec.id
        for rec in index.records
        if Path(rec.path).name == target.name
        and target.as_posix().endswith(Path(rec.path).as_posix())
    ]
    return matches[0] if len(matches) == 1 else None


def cmd_query(args) -> int:
    if args.top < 1:
        print("error: --top must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    index, code = _load_index_or_fail(args.index)
    if index is None:
        return code
    image_path = Path(args.image)
    try:
        blob = image_path.read_bytes()
    except OSError as exc:
        print(f"error: cannot read query image: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        query = extract_descriptor(decode_image(blob))
    except DecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    exclude_id = _resolve_self_id(index, image_path) if args.exclude_self else None
    result = search_topk(index, query, args.top, exclude_id=exclude_id)

    if args.format == "json":
        doc = {
            "k": result.k,
            "entries": [
                {
                    "id": hit.id,
                    "label": hit.label,
                    "path": hit.path,
                    "distance": hit.distance,
                    "segments": {
                        "histogram": hit.segments.histogram,
                        "moments": hit.segments.moments,
                        "hu": hit.segments.hu,
                    },
                }
                for hit in result.hits
            ],
        }
        print(json.dumps(doc, indent=2))
    else:
        print(f"{'rank':>4} {'id':>6} {'label':<16} {'distance':>12} "
              f"{'hist':>10} {'moments':>10} {'hu':>10}  path")
        for rank, hit in enumerate(result.hits, start=1):
            print(
                f"{rank:>4} {hit.id:>6} {hit.label:<16} {hit.distance:>12.6f} "
                f"{hit.segments.histogram:>10.6f} {hit.segments.moments:>10.6f} "
                f"{hit.segments.hu:>10.6f}  {hit.path}"
            )
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.top < 1:
        print("error: --top must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    index, code = _load_index_or_fail(args.index)
    if index is None:
        return code
    try:
        report = evaluate(index, args.top, feature=args.feature, queries=args.queries)
    except UnlabeledRecord as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        Path(args.out).write_text(render_report(report, CSV), encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(
        f"{args.feature} @ {args.top}: mean precision {report.mean_precision:.2f}, "
        f"mean recall {report.mean_recall:.2f}"
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.repeat < 1:
        print("error: --repeat must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    data = Path(args.data)
    if not data.is_dir():
        print(f"error: data directory not found: {data}", file=sys.stderr)
        return EXIT_RUNTIME
    entries = discover_corpus(data, LAYOUT_FOLDERS)
    if not entries:
        print("error: no images found", file=sys.stderr)
        return EXIT_RUNTIME
    report = benchmark_extraction([e.path for e in entries], repeats=args.repeat)
    sys.stdout.write(render_timing_report(report))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    index, code = _load_index_or_fail(args.index)
    if index is None:
        return code
    images = Path(args.images)
    if not images.is_dir():
        print(f"error: images directory not found: {images}", file=sys.stderr)
        return EXIT_RUNTIME

    # Probe the port before handing off to the server for a clean exit code.
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((args.host, args.port))
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        probe.close()

    app = create_app(index, images, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


_COMMANDS = {
    "index": cmd_index,
    "query": cmd_query,
    "eval": cmd_eval,
    "bench": cmd_bench,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
