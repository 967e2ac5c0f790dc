"""Average distance correlation between two embedding spaces.

For each word, take its distances to every other word in space A and in
space B; the Pearson r of those two lists says how much the spaces agree
from that word's point of view. The vocabulary mean of r scores the pair of
spaces, and works even when the spaces have different dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ArityError, InsufficientDataError, UndefinedCorrelationError
from .lexicon import TIER_ORDER
from .vectorspace import DistanceKind, distance


def pearson(x, y):
    """Sample Pearson correlation, clamped to [-1, 1]."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ArityError(f"pearson needs equal-length 1-d inputs, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise UndefinedCorrelationError("pearson needs at least two points")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation is undefined for a constant input")
    return max(-1.0, min(1.0, float(xc @ yc) / math.sqrt(sxx * syy)))


def distance_vector(word, table, vocabulary, kind=DistanceKind.COSINE):
    """Distances from ``word`` to each other vocabulary word, in vocabulary order.

    Raises ``KeyError`` naming the first word without a vector.
    """
    for w in (word, *vocabulary):
        if w not in table:
            raise KeyError(w)
    u = table[word]
    return [distance(u, table[w], kind) for w in vocabulary if w != word]


@dataclass
class ConsistencyReport:
    space_word: str
    space_def: str
    kind: DistanceKind
    per_word_r: dict[str, float]
    mean_r: float
    tier_means: dict = field(default_factory=dict)
    tier_counts: dict = field(default_factory=dict)
    skipped: list[str] = field(default_factory=list)
    coverage: float = 1.0


def _fmean(values):
    values = list(values)
    return math.fsum(values) / len(values) if values else float("nan")


def space_consistency(word_space, def_space, vocabulary, kind=DistanceKind.COSINE,
                      tiers=None, jobs=1):
    """Per-word distance correlation between two spaces and its averages.

    Only words present in both spaces take part, and each distance list runs
    over that shared set (self excluded). Words whose list is constant in
    either space are skipped. ``tiers`` maps word to tier for stratified
    means. The shared set is sorted internally so input order never matters.
    """
    kind = DistanceKind(kind)
    vocab = list(dict.fromkeys(vocabulary))
    shared = sorted(w for w in vocab if w in word_space and w in def_space)
    if len(shared) < 3:
        raise InsufficientDataError(
            f"only {len(shared)} words are covered by both {word_space.space_name} "
            f"and {def_space.space_name}; need 3")
    kernels.set_threads(jobs)
    DA = kernels.distance_matrix(word_space.rows(shared), kind.code, jobs)
    DB = kernels.distance_matrix(def_space.rows(shared), kind.code, jobs)
    r = kernels.row_pearson_offdiag(DA, DB, jobs)
    per_word = {w: float(v) for w, v in zip(shared, r) if not math.isnan(v)}
    skipped = [w for w in vocab if w not in per_word]

    tier_means, tier_counts = {}, {}
    if tiers is not None:
        for t in TIER_ORDER:
            vals = [v for w, v in per_word.items() if tiers.get(w) is t]
            tier_counts[t] = len(vals)
            tier_means[t] = _fmean(vals)
    return ConsistencyReport(
        space_word=word_space.space_name,
        space_def=def_space.space_name,
        kind=kind,
        per_word_r=per_word,
        mean_r=_fmean(per_word.values()),
        tier_means=tier_means,
        tier_counts=tier_counts,
        skipped=skipped,
        coverage=len(shared) / len(vocab),
    )


@dataclass
class ConsistencyGrid:
    """Definition sources x tiers x word spaces, each cell a mean r."""

    sources: list[str]
    spaces: list[str]
    kind: DistanceKind
    cells: dict  # (source, tier, space) -> mean r, NaN when the tier is empty
    counts: dict
    reports: dict = field(default_factory=dict, repr=False)  # (source, space) -> report

    def high_exceeds_low(self):
        """Per (source, space): does the high tier agree more than the low tier?"""
        out = {}
        hi, lo = TIER_ORDER[0], TIER_ORDER[-1]
        for s in self.sources:
            for sp in self.spaces:
                a, b = self.cells[s, hi, sp], self.cells[s, lo, sp]
                out[s, sp] = None if math.isnan(a) or math.isnan(b) else bool(a > b)
        return out


def consistency_matrix(def_spaces, word_spaces, vocabulary, tiers, kind=DistanceKind.COSINE,
                       jobs=1):
    """Run :func:`space_consistency` for every (definition source, word space) pair.

    ``def_spaces`` and ``word_spaces`` are lists of embedding tables.
    """
    kind = DistanceKind(kind)
    cells, counts, reports = {}, {}, {}
    for ds in def_spaces:
        for ws in word_spaces:
            rep = space_consistency(ws, ds, vocabulary, kind, tiers=tiers, jobs=jobs)
            reports[ds.space_name, ws.space_name] = rep
            for t in TIER_ORDER:
                cells[ds.space_name, t, ws.space_name] = rep.tier_means[t]
                counts[ds.space_name, t, ws.space_name] = rep.tier_counts[t]
    return ConsistencyGrid(
        sources=[d.space_name for d in def_spaces],
        spaces=[w.space_name for w in word_spaces],
        kind=kind,
        cells=cells,
        counts=counts,
        reports=reports,
    )
