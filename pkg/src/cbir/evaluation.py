"""Precision/recall@k evaluation sweeps and extraction-time benchmarking.

Every indexed image serves once as a query (self-match included), per-class
rows average over that class's queries, and the mean row is the arithmetic
mean of the class rows. Single-feature runs restrict the L1 distance to one
descriptor segment, which under per-dimension min-max scaling is identical
to re-normalizing the segment in isolation.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .descriptors import (
    DESCRIPTOR_SIZE,
    HIST_SLICE,
    HU_SLICE,
    MOMENT_SLICE,
    extract_descriptor,
)
from .imaging import decode_image, resize_canonical
from .index import MINMAX, RetrievalIndex, normalize_matrix

FEATURE_SLICES = {
    "hist": HIST_SLICE,
    "moments": MOMENT_SLICE,
    "hu": HU_SLICE,
    "fused": slice(0, DESCRIPTOR_SIZE),
}
FEATURES = tuple(FEATURE_SLICES)

QUERIES_ALL = "all"
QUERIES_ONE_PER_CLASS = "one-per-class"


class UnlabeledRecord(Exception):
    """An index record has an empty label, so class metrics are undefined."""


@dataclass(frozen=True)
class ClassRow:
    name: str
    precision: float
    recall: float


@dataclass(frozen=True)
class EvalReport:
    k: int
    feature: str
    mode: str
    queries: str
    include_self: bool
    rows: tuple[ClassRow, ...]
    mean_precision: float
    mean_recall: float


@dataclass(frozen=True)
class TimingStats:
    mean: float
    median: float
    p95: float


@dataclass(frozen=True)
class TimingReport:
    """Per-image extraction seconds, with and without decode+resize."""

    inclusive: TimingStats
    exclusive: TimingStats
    count: int


def precision_at_k(ranked_labels: Sequence[str], query_label: str, k: int) -> float:
    """Percentage of the first min(k, len) results sharing the query label.

    The divisor stays k even when fewer results are available.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    top = ranked_labels[: min(k, len(ranked_labels))]
    relevant = sum(1 for lbl in top if lbl == query_label)
    return 100.0 * relevant / k


def recall_at_k(
    ranked_labels: Sequence[str], query_label: str, k: int, class_size: int
) -> float:
    """Percentage of the query's class retrieved within the top k."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if class_size < 1:
        raise ValueError(f"class_size must be positive, got {class_size}")
    top = ranked_labels[: min(k, len(ranked_labels))]
    relevant = sum(1 for lbl in top if lbl == query_label)
    return 100.0 * relevant / class_size


def evaluate(
    index: RetrievalIndex,
    k: int,
    feature: str = "fused",
    mode: str | None = None,
    queries: str = QUERIES_ALL,
    include_self: bool = True,
) -> EvalReport:
    """Run the retrieval sweep and aggregate precision/recall per class.

    The query image itself is part of the ranking by default; passing
    include_self=False drops it before the top-k cut, and the report
    records which convention produced it.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if feature not in FEATURE_SLICES:
        raise ValueError(f"feature must be one of {FEATURES}, got {feature!r}")
    if queries not in (QUERIES_ALL, QUERIES_ONE_PER_CLASS):
        raise ValueError(f"unknown query sampling {queries!r}")
    labels = index.labels()
    for rec in index.records:
        if not rec.label:
            raise UnlabeledRecord(f"record {rec.id} has no label")
    mode = mode or index.mode

    matrix = index.matrix
    if mode == MINMAX:
        matrix = normalize_matrix(matrix, index.stats)
    cols = matrix[:, FEATURE_SLICES[feature]]
    ids = index.ids
    label_arr = np.array(labels)
    n = len(index)
    class_sizes = {name: int((label_arr == name).sum()) for name in set(labels)}

    if queries == QUERIES_ALL:
        query_rows = range(n)
    else:
        first_by_class: dict[str, int] = {}
        for row, name in enumerate(labels):  # records are in ascending-id order
            first_by_class.setdefault(name, row)
        query_rows = sorted(first_by_class.values())

    per_class: dict[str, list[tuple[float, float]]] = {}
    depth = min(k, n if include_self else max(n - 1, 0))
    for row in query_rows:
        dists = np.abs(cols - cols[row]).sum(axis=1)
        order = np.lexsort((ids, dists))
        if not include_self:
            order = order[order != row]
        order = order[:depth]
        ranked = label_arr[order]
        query_label = labels[row]
        relevant = int((ranked == query_label).sum())
        p = 100.0 * relevant / k
        r = 100.0 * relevant / class_sizes[query_label]
        per_class.setdefault(query_label, []).append((p, r))

    rows = tuple(
        ClassRow(
            name=name,
            precision=float(np.mean([p for p, _ in vals])),
            recall=float(np.mean([r for _, r in vals])),
        )
        for name, vals in sorted(per_class.items())
    )
    return EvalReport(
        k=k,
        feature=feature,
        mode=mode,
        queries=queries,
        include_self=include_self,
        rows=rows,
        mean_precision=float(np.mean([row.precision for row in rows])),
        mean_recall=float(np.mean([row.recall for row in rows])),
    )


def evaluate_ablations(
    index: RetrievalIndex,
    k: int,
    mode: str | None = None,
    queries: str = QUERIES_ALL,
    include_self: bool = True,
) -> dict[str, EvalReport]:
    """One report per feature selection: hist, moments, hu, fused."""
    return {
        f: evaluate(index, k, feature=f, mode=mode, queries=queries, include_self=include_self)
        for f in FEATURES
    }


def benchmark_extraction(
    paths: Sequence[str | Path], repeats: int = 1
) -> TimingReport:
    """Wall-clock extraction timings over a corpus of image files.

    The inclusive variant times decode + resize + extraction; the exclusive
    variant times extraction alone on a pre-resized image.
    """
    if not paths:
        raise ValueError("corpus must not be empty")
    if repeats < 1:
        raise ValueError(f"repeats must be positive, got {repeats}")
    blobs = [Path(p).read_bytes() for p in paths]
    inclusive: list[float] = []
    exclusive: list[float] = []
    for _ in range(repeats):
        for blob in blobs:
            t0 = time.perf_counter()
            img = decode_image(blob)
            extract_descriptor(img)
            inclusive.append(time.perf_counter() - t0)

            canonical = resize_canonical(img)
            t1 = time.perf_counter()
            extract_descriptor(canonical)
            exclusive.append(time.perf_counter() - t1)
    return TimingReport(
        inclusive=_stats(inclusive),
        exclusive=_stats(exclusive),
        count=len(inclusive),
    )


def _stats(samples: Sequence[float]) -> TimingStats:
    arr = np.asarray(samples)
    return TimingStats(
        mean=float(arr.mean()),
        median=float(np.median(arr)),
        p95=float(np.percentile(arr, 95)),
    )


CSV = "csv"
MARKDOWN = "markdown"


def render_report(report: EvalReport, fmt: str = CSV) -> str:
    """Deterministic text rendering: per-class rows then a mean row."""
    if fmt == CSV:
        lines = ["class,precision,recall"]
        for row in report.rows:
            lines.append(f"{row.name},{row.precision:.4f},{row.recall:.4f}")
        if report.rows:
            lines.append(f"mean,{report.mean_precision:.4f},{report.mean_recall:.4f}")
        return "\n".join(lines) + "\n"
    if fmt == MARKDOWN:
        lines = ["| class | precision | recall |", "| --- | --- | --- |"]
        for row in report.rows:
            lines.append(f"| {row.name} | {row.precision:.4f} | {row.recall:.4f} |")
        if report.rows:
            lines.append(
                f"| mean | {report.mean_precision:.4f} | {report.mean_recall:.4f} |"
            )
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def write_report(report: EvalReport, fmt: str, destination: str | Path | io.TextIOBase) -> None:
    text = render_report(report, fmt)
    if isinstance(destination, (str, Path)):
        Path(destination).write_text(text, encoding="utf-8")
    else:
        destination.write(text)


def render_timing_report(report: TimingReport) -> str:
    lines = ["variant,mean,median,p95,count"]
    for name, stats in (("inclusive", report.inclusive), ("exclusive", report.exclusive)):
        lines.append(
            f"{name},{stats.mean:.6f},{stats.median:.6f},{stats.p95:.6f},{report.count}"
        )
    return "\n".join(lines) + "\n"
