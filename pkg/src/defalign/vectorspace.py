"""Distances between the embeddings of one word's definitions from two sources."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ArityError, BoundsError, DomainError


class DistanceKind(enum.Enum):
    COSINE = "cosine"
    EUCLIDEAN = "euclidean"

    @property
    def code(self):
        return kernels.COSINE if self is DistanceKind.COSINE else kernels.EUCLIDEAN


def _pair(u, v):
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ArityError(f"dimension mismatch: {u.size} vs {v.size}")
    return u, v


def cosine_distance(u, v):
    """``1 - cos(u, v)``, clamped to [0, 2]."""
    u, v = _pair(u, v)
    uu, vv = float(u @ u), float(v @ v)
    if uu == 0.0 or vv == 0.0:
        raise DomainError("cosine distance is undefined for a zero vector")
    # one square root of the product keeps parallel vectors at exactly 0
    d = 1.0 - float(u @ v) / math.sqrt(uu * vv)
    return min(2.0, max(0.0, d))


def euclidean_distance(u, v):
    u, v = _pair(u, v)
    return float(np.linalg.norm(u - v))


def distance(u, v, kind=DistanceKind.COSINE):
    kind = DistanceKind(kind)
    return cosine_distance(u, v) if kind is DistanceKind.COSINE else euclidean_distance(u, v)


@dataclass
class PairDistanceTable:
    source_a: str
    source_b: str
    kind: DistanceKind
    entries: dict[str, float]
    skipped: list[str] = field(default_factory=list)

    def mean(self):
        if not self.entries:
            return float("nan")
        return math.fsum(self.entries.values()) / len(self.entries)

    def __len__(self):
        return len(self.entries)


def pair_distances(defs_embedded_a, defs_embedded_b, vocabulary, kind=DistanceKind.COSINE):
    """Per-word distance between two sources' definition embeddings.

    Words without a vector on either side go to ``skipped``.
    """
    kind = DistanceKind(kind)
    a, b = defs_embedded_a, defs_embedded_b
    if a.dim != b.dim:
        raise ArityError(f"{a.space_name} has dim {a.dim}, {b.space_name} has dim {b.dim}")
    entries, skipped = {}, []
    for w in vocabulary:
        if w in a and w in b:
            entries[w] = distance(a[w], b[w], kind)
        else:
            skipped.append(w)
    return PairDistanceTable(a.space_name, b.space_name, kind, entries, skipped)


def topk_outliers(table, k):
    """The ``k`` largest distances, descending; equal distances in word order."""
    if k < 0 or k > len(table.entries):
        raise BoundsError(f"k={k} outside 0..{len(table.entries)}")
    ranked = sorted(table.entries.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


@dataclass(frozen=True)
class WorksheetRow:
    rank: int
    word: str
    distance: float
    def_a: str
    def_b: str


@dataclass
class Worksheet:
    """Most distant definition pairs, laid out for a human reviewer."""

    source_a: str
    source_b: str
    kind: DistanceKind
    rows: list[WorksheetRow]


def outlier_worksheet(table, k, defs_a, defs_b):
    a = {r.word: r.text for r in defs_a}
    b = {r.word: r.text for r in defs_b}
    rows = [
        WorksheetRow(i, w, d, a.get(w, ""), b.get(w, ""))
        for i, (w, d) in enumerate(topk_outliers(table, k), 1)
    ]
    return Worksheet(table.source_a, table.source_b, table.kind, rows)


@dataclass
class MeanDistanceMatrix:
    sources: list[str]
    kind: DistanceKind
    cells: dict[tuple[str, str], float]
    counts: dict[tuple[str, str], int]


def mean_distance_matrix(tables, vocabulary, kind=DistanceKind.COSINE):
    """Source x source mean definition distance over ``vocabulary``.

    ``tables`` maps source name to its definition-embedding table.
    """
    names = list(tables)
    cells, counts = {}, {}
    for sa in names:
        for sb in names:
            t = pair_distances(tables[sa], tables[sb], vocabulary, kind)
            cells[sa, sb] = t.mean()
            counts[sa, sb] = len(t)
    return MeanDistanceMatrix(names, DistanceKind(kind), cells, counts)
