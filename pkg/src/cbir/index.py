"""Retrieval index: descriptor records, normalization stats, top-k search.

The index is immutable once built. Descriptors are stored raw; in MINMAX
mode a normalized copy of the record matrix is prepared once at build time
and queries are mapped through the same per-dimension statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .descriptors import (
    DESCRIPTOR_SIZE,
    HIST_SLICE,
    HU_SLICE,
    MOMENT_SLICE,
    Descriptor,
    extract_descriptor,
)
from .imaging import RgbImage

RAW = "RAW"
MINMAX = "MINMAX"
MODES = (RAW, MINMAX)

FORMAT_MAGIC = "CBIRIDX"
FORMAT_VERSION = 1


class DuplicateId(Exception):
    """Two corpus entries share an id."""


class EmptyCorpus(Exception):
    """No images were supplied to build from."""


class EmptyIndex(Exception):
    """Search was attempted against an index with no records."""


class LengthMismatch(Exception):
    """Distance operands have different dimensionality."""


class FormatError(Exception):
    """Index file is malformed; carries the 1-based offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class VersionError(Exception):
    """Index file declares an unknown format version."""


@dataclass(frozen=True)
class IndexRecord:
    id: int
    label: str
    path: str
    descriptor: Descriptor


@dataclass(frozen=True)
class NormalizationStats:
    """Per-dimension corpus minima and maxima over the raw descriptors."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=np.float64)
        maxs = np.asarray(self.maxs, dtype=np.float64)
        if mins.shape != (DESCRIPTOR_SIZE,) or maxs.shape != (DESCRIPTOR_SIZE,):
            raise ValueError("stats must cover all descriptor dimensions")
        if (mins > maxs).any():
            raise ValueError("per-dimension min must not exceed max")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        mins.setflags(write=False)
        maxs.setflags(write=False)


@dataclass(frozen=True)
class SegmentDistances:
    histogram: float
    moments: float
    hu: float


@dataclass(frozen=True)
class SearchHit:
    id: int
    label: str
    path: str
    distance: float
    segments: SegmentDistances


@dataclass(frozen=True)
class RankedResult:
    """Hits sorted by ascending distance, ties broken by ascending id."""

    hits: tuple[SearchHit, ...]
    k: int


class RetrievalIndex:
    """Immutable collection of descriptor records plus normalization stats."""

    def __init__(
        self,
        records: Sequence[IndexRecord],
        stats: NormalizationStats,
        mode: str,
    ):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        self._records = tuple(sorted(records, key=lambda r: r.id))
        self._stats = stats
        self._mode = mode
        self._by_id = {r.id: r for r in self._records}
        if self._records:
            matrix = np.stack([r.descriptor.values for r in self._records])
        else:
            matrix = np.empty((0, DESCRIPTOR_SIZE))
        matrix.setflags(write=False)
        self._matrix = matrix
        if mode == MINMAX and len(self._records):
            search = normalize_matrix(matrix, stats)
            search.setflags(write=False)
            self._search_matrix = search
        else:
            self._search_matrix = matrix
        self._ids = np.array([r.id for r in self._records], dtype=np.int64)

    @property
    def records(self) -> tuple[IndexRecord, ...]:
        return self._records

    @property
    def stats(self) -> NormalizationStats:
        return self._stats

    @property
    def mode(self) -> str:
        return self._mode

    @property
    def matrix(self) -> np.ndarray:
        """Raw descriptor matrix, one row per record in id order."""
        return self._matrix

    @property
    def search_matrix(self) -> np.ndarray:
        """Matrix distances are computed against (normalized when MINMAX)."""
        return self._search_matrix

    @property
    def ids(self) -> np.ndarray:
        return self._ids

    def __len__(self) -> int:
        return len(self._records)

    def get(self, record_id: int) -> IndexRecord | None:
        return self._by_id.get(record_id)

    def labels(self) -> list[str]:
        return [r.label for r in self._records]


def compute_stats(matrix: np.ndarray) -> NormalizationStats:
    return NormalizationStats(mins=matrix.min(axis=0), maxs=matrix.max(axis=0))


def from_records(records: Sequence[IndexRecord], mode: str = MINMAX) -> RetrievalIndex:
    """Assemble an index from extracted records, computing stats from them."""
    if not records:
        raise EmptyCorpus("no records to index")
    seen: set[int] = set()
    for rec in records:
        if rec.id < 0:
            raise ValueError(f"record id must be nonnegative, got {rec.id}")
        if rec.id in seen:
            raise DuplicateId(f"duplicate record id {rec.id}")
        seen.add(rec.id)
    matrix = np.stack([r.descriptor.values for r in records])
    return RetrievalIndex(records, compute_stats(matrix), mode)


def build_index(
    corpus: Iterable[tuple[int, str, str, RgbImage]], mode: str = MINMAX
) -> RetrievalIndex:
    """Extract a descriptor per (id, label, path, image) entry and index them."""
    records = [
        IndexRecord(id=i, label=label, path=path, descriptor=extract_descriptor(img))
        for i, label, path, img in corpus
    ]
    return from_records(records, mode)


def normalize_matrix(matrix: np.ndarray, stats: NormalizationStats) -> np.ndarray:
    span = stats.maxs - stats.mins
    safe = np.where(span > 0, span, 1.0)
    out = (matrix - stats.mins) / safe
    if matrix.ndim == 2:
        out[:, span == 0] = 0.0
    else:
        out[span == 0] = 0.0
    return out


def normalize(desc: Descriptor, stats: NormalizationStats) -> Descriptor:
    """Map each dimension through (v - min) / (max - min).

    Constant dimensions collapse to 0; out-of-range query values are not
    clamped, so the map stays order-preserving.
    """
    return Descriptor(normalize_matrix(desc.values, stats))


def manhattan(a: Descriptor | np.ndarray, b: Descriptor | np.ndarray) -> float:
    """L1 distance between two equal-length vectors."""
    av = a.values if isinstance(a, Descriptor) else np.asarray(a, dtype=np.float64)
    bv = b.values if isinstance(b, Descriptor) else np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape:
        raise LengthMismatch(f"length mismatch: {av.shape} vs {bv.shape}")
    return float(np.abs(av - bv).sum())


def search_topk(
    index: RetrievalIndex,
    query: Descriptor,
    k: int,
    exclude_id: int | None = None,
) -> RankedResult:
    """Exhaustive L1 scan returning the k closest records.

    In MINMAX mode the query is mapped through the index statistics before
    the scan. Ties in distance break by ascending record id.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if len(index) == 0:
        raise EmptyIndex("cannot search an empty index")
    q = query.values
    if index.mode == MINMAX:
        q = normalize_matrix(q, index.stats)

    keep = np.ones(len(index), dtype=bool)
    if exclude_id is not None:
        keep = index.ids != exclude_id
    matrix = index.search_matrix[keep]
    ids = index.ids[keep]
    if matrix.shape[0] == 0:
        return RankedResult(hits=(), k=k)

    diff = np.abs(matrix - q)
    seg_hist = diff[:, HIST_SLICE].sum(axis=1)
    seg_mom = diff[:, MOMENT_SLICE].sum(axis=1)
    seg_hu = diff[:, HU_SLICE].sum(axis=1)
    total = seg_hist + seg_mom + seg_hu

    order = np.lexsort((ids, total))[: min(k, matrix.shape[0])]
    hits = []
    for row in order:
        rec = index.get(int(ids[row]))
        hits.append(
            SearchHit(
                id=rec.id,
                label=rec.label,
                path=rec.path,
                distance=float(total[row]),
                segments=SegmentDistances(
                    histogram=float(seg_hist[row]),
                    moments=float(seg_mom[row]),
                    hu=float(seg_hu[row]),
                ),
            )
        )
    return RankedResult(hits=tuple(hits), k=k)


def _format_values(values: np.ndarray) -> str:
    return ",".join(f"{v:.9g}" for v in values)


def _parse_values(text: str, line_no: int) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != DESCRIPTOR_SIZE:
        raise FormatError(
            line_no, f"expected {DESCRIPTOR_SIZE} values, got {len(parts)}"
        )
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise FormatError(line_no, "non-numeric descriptor value") from None


def save_index(index: RetrievalIndex, destination: str | Path) -> None:
    """Write the line-oriented text format.

    Header, MIN and MAX stat lines, then one tab-separated record line per
    image with the raw descriptor at 9 significant digits.
    """
    lines = [f"{FORMAT_MAGIC} {FORMAT_VERSION} {DESCRIPTOR_SIZE} {index.mode}"]
    lines.append(f"MIN {_format_values(index.stats.mins)}")
    lines.append(f"MAX {_format_values(index.stats.maxs)}")
    for rec in index.records:
        for field, name in ((rec.label, "label"), (rec.path, "path")):
            if "\t" in field or "\n" in field:
                raise ValueError(f"record {name} may not contain tabs or newlines")
        lines.append(
            f"{rec.id}\t{rec.label}\t{rec.path}\t{_format_values(rec.descriptor.values)}"
        )
    Path(destination).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_index(source: str | Path) -> RetrievalIndex:
    """Parse an index file, validating structure line by line."""
    text = Path(source).read_text(encoding="utf-8")
    lines = text.splitlines()
    if len(lines) < 3:
        raise FormatError(len(lines) + 1, "file truncated before stats lines")

    header = lines[0].split(" ")
    if len(header) != 4 or header[0] != FORMAT_MAGIC:
        raise FormatError(1, f"bad header, expected '{FORMAT_MAGIC} <version> <dims> <mode>'")
    try:
        version = int(header[1])
    except ValueError:
        raise FormatError(1, f"non-numeric version {header[1]!r}") from None
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported index version {version}")
    if header[2] != str(DESCRIPTOR_SIZE):
        raise FormatError(1, f"expected {DESCRIPTOR_SIZE} dimensions, got {header[2]}")
    mode = header[3]
    if mode not in MODES:
        raise FormatError(1, f"unknown mode {mode!r}")

    stats_values = {}
    for line_no, tag in ((2, "MIN"), (3, "MAX")):
        line = lines[line_no - 1]
        if not line.startswith(tag + " "):
            raise FormatError(line_no, f"expected {tag} line")
        stats_values[tag] = _parse_values(line[len(tag) + 1 :], line_no)
    try:
        stats = NormalizationStats(mins=stats_values["MIN"], maxs=stats_values["MAX"])
    except ValueError as exc:
        raise FormatError(2, str(exc)) from None

    records = []
    seen: set[int] = set()
    for line_no, line in enumerate(lines[3:], start=4):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise FormatError(line_no, f"expected 4 tab-separated fields, got {len(fields)}")
        try:
            rec_id = int(fields[0])
        except ValueError:
            raise FormatError(line_no, f"non-numeric record id {fields[0]!r}") from None
        if rec_id < 0:
            raise FormatError(line_no, f"negative record id {rec_id}")
        if rec_id in seen:
            raise FormatError(line_no, f"duplicate record id {rec_id}")
        seen.add(rec_id)
        values = _parse_values(fields[3], line_no)
        records.append(
            IndexRecord(
                id=rec_id,
                label=fields[1],
                path=fields[2],
                descriptor=Descriptor(values),
            )
        )
    return RetrievalIndex(records, stats, mode)
