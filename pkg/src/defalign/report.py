"""Stratified aggregation and deterministic CSV / JSON / plot-series output."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass
from functools import singledispatch
from pathlib import Path

from .consistency import ConsistencyGrid, ConsistencyReport
from .errors import DefalignError, ValidationError
from .ingest import SourceId
from .lexicon import POS_ORDER, TIER_ORDER
from .surface import LengthStats, MatchHistogram, ScoreTable
from .vectorspace import MeanDistanceMatrix, PairDistanceTable, Worksheet


class Stratum(enum.Enum):
    TIER = "tier"
    POS = "pos"


class Format(enum.Enum):
    CSV = "csv"
    JSON = "json"
    PLOT = "plot"


@dataclass
class StratumTable:
    metric_name: str
    by: Stratum
    models: list[str]
    strata: list
    columns: list[str]
    cells: dict  # (model, stratum, column) -> mean
    counts: dict  # (model, stratum, column) -> n

    def mean_of(self, model, column):
        """Count-weighted recombination of one model/column over all strata."""
        tot, n = [], 0
        for s in self.strata:
            c = self.counts.get((model, s, column), 0)
            if c:
                tot.append(self.cells[model, s, column] * c)
                n += c
        return math.fsum(tot) / n if n else float("nan")


@dataclass
class LengthTable:
    rows: list  # (source, unit, LengthStats)


@dataclass
class MatchSummary:
    histograms: list[MatchHistogram]


def _orient(table, kinds):
    """(model, column) for a table: the generated side is the row when known."""
    ka = kinds.get(table.source_a) or SourceId.infer(table.source_a)
    kb = kinds.get(table.source_b) or SourceId.infer(table.source_b)
    if kb.generated and not ka.generated:
        return table.source_b, table.source_a
    return table.source_a, table.source_b


def stratify(tables, entries, by=Stratum.TIER, metric_name=None, sources=None):
    """Mean score per (model, stratum, dictionary column).

    ``tables`` is one or more :class:`PairDistanceTable` / :class:`ScoreTable`.
    Every scored word must have a lexicon entry. ``sources`` optionally maps
    names to :class:`SourceId` to fix row/column orientation.
    """
    by = Stratum(by)
    if isinstance(tables, (PairDistanceTable, ScoreTable)):
        tables = [tables]
    lookup = {e.word: e for e in entries}
    kinds = dict(sources or {})
    strata = list(TIER_ORDER if by is Stratum.TIER else POS_ORDER)
    models, columns = [], []
    sums, counts = {}, {}
    for t in tables:
        model, col = _orient(t, kinds)
        if model not in models:
            models.append(model)
        if col not in columns:
            columns.append(col)
        for w in sorted(t.entries):
            e = lookup.get(w)
            if e is None:
                raise ValidationError(f"word {w!r} has no lexicon entry")
            s = e.tier if by is Stratum.TIER else e.pos
            if s is None:
                raise ValidationError(f"word {w!r} has no POS tag")
            sums.setdefault((model, s, col), []).append(t.entries[w])
    cells = {k: math.fsum(v) / len(v) for k, v in sums.items()}
    counts = {k: len(v) for k, v in sums.items()}
    if metric_name is None:
        kind = getattr(tables[0], "kind", None) if tables else None
        metric_name = kind.value if kind is not None else getattr(tables[0], "metric", "score")
    return StratumTable(metric_name, by, models, strata, columns, cells, counts)


# -- rendering ---------------------------------------------------------------

def _f2(v):
    return "" if v is None or math.isnan(v) else f"{v:.2f}"


def _f6(v):
    return "" if v is None or math.isnan(v) else f"{v:.6f}"


def _jnum(v):
    return None if v is None or (isinstance(v, float) and math.isnan(v)) else v


def _label(s):
    return s.value.lower() if isinstance(s, enum.Enum) else str(s)


@singledispatch
def csv_rows(artifact):
    raise TypeError(f"no CSV rendering for {type(artifact).__name__}")


@singledispatch
def json_obj(artifact):
    raise TypeError(f"no JSON rendering for {type(artifact).__name__}")


@singledispatch
def plot_rows(artifact):
    raise TypeError(f"no plot series for {type(artifact).__name__}")


@csv_rows.register
def _(h: MatchHistogram):
    return ["bin", "count"], [[b, c] for b, c in sorted(h.bins.items())]


plot_rows.register(MatchHistogram, csv_rows.dispatch(MatchHistogram))


@json_obj.register
def _(h: MatchHistogram):
    return {
        "pair": list(h.pair),
        "bins": {str(b): c for b, c in sorted(h.bins.items())},
        "n_pairs": h.n_pairs,
        "mean_word_count": _jnum(h.mean_word_count),
        "threshold": h.threshold,
        "long_matches": h.long_matches,
        "skipped": list(h.skipped),
        "longest": [
            {"word": w, "substring": m.substring, "char_len": m.char_len,
             "word_count": m.word_count}
            for w, m in sorted(h.matches.items(), key=lambda kv: (-kv[1].char_len, kv[0]))[:5]
        ],
    }


@csv_rows.register
def _(s: MatchSummary):
    header = ["source_a", "source_b", "n_pairs", "mean_word_count", "threshold",
              "long_matches", "skipped"]
    rows = [[h.pair[0], h.pair[1], h.n_pairs, _f6(h.mean_word_count), h.threshold,
             h.long_matches, len(h.skipped)] for h in s.histograms]
    return header, rows


@plot_rows.register
def _(s: MatchSummary):
    return ["pair", "mean_word_count"], [
        [f"{h.pair[0]}|{h.pair[1]}", _f6(h.mean_word_count)] for h in s.histograms]


@json_obj.register
def _(s: MatchSummary):
    return {"histograms": [json_obj(h) for h in s.histograms]}


@csv_rows.register
def _(t: LengthTable):
    header = ["source", "unit", "n", "mean", "min", "max", "std"]
    rows = [[src, _label(unit), st.n, _f2(st.mean), st.min, st.max, _f2(st.std)]
            for src, unit, st in t.rows]
    return header, rows


@json_obj.register
def _(t: LengthTable):
    return {"rows": [{"source": src, "unit": _label(unit), "n": st.n, "mean": st.mean,
                      "min": st.min, "max": st.max, "std": st.std} for src, unit, st in t.rows]}


@json_obj.register
def _(st: LengthStats):
    return {"n": st.n, "mean": st.mean, "min": st.min, "max": st.max, "std": st.std}


def _scores_csv(t):
    return ["word", "distance"], [[w, _f6(d)] for w, d in t.entries.items()]


def _scores_json(t, metric):
    return {
        "source_a": t.source_a,
        "source_b": t.source_b,
        "metric": metric,
        "entries": {w: d for w, d in t.entries.items()},
        "skipped": list(t.skipped),
    }


@csv_rows.register
def _(t: PairDistanceTable):
    return _scores_csv(t)


plot_rows.register(PairDistanceTable, _scores_csv)
plot_rows.register(ScoreTable, _scores_csv)


@json_obj.register
def _(t: PairDistanceTable):
    return _scores_json(t, t.kind.value)


@csv_rows.register
def _(t: ScoreTable):
    return _scores_csv(t)


@json_obj.register
def _(t: ScoreTable):
    return _scores_json(t, t.metric)


@csv_rows.register
def _(ws: Worksheet):
    return ["rank", "word", "distance", "def_a", "def_b"], [
        [r.rank, r.word, _f6(r.distance), r.def_a, r.def_b] for r in ws.rows]


@json_obj.register
def _(ws: Worksheet):
    return {"source_a": ws.source_a, "source_b": ws.source_b, "kind": ws.kind.value,
            "rows": [{"rank": r.rank, "word": r.word, "distance": r.distance,
                      "def_a": r.def_a, "def_b": r.def_b} for r in ws.rows]}


@csv_rows.register
def _(t: StratumTable):
    header = ["model", "stratum"] + list(t.columns)
    rows = []
    for m in t.models:
        for s in t.strata:
            if not any((m, s, c) in t.counts for c in t.columns):
                continue
            rows.append([m, _label(s)] + [_f2(t.cells.get((m, s, c))) for c in t.columns])
    return header, rows


def _extreme_flags(values, pick):
    """Flag the entries equal to min/max after the two-decimal rounding shown in tables."""
    shown = {k: round(v, 2) for k, v in values.items() if v is not None and not math.isnan(v)}
    if not shown:
        return {}
    best = pick(shown.values())
    return {k: v == best for k, v in shown.items()}


@json_obj.register
def _(t: StratumTable):
    cells = []
    for m in t.models:
        for c in t.columns:
            vals = {s: t.cells.get((m, s, c)) for s in t.strata if (m, s, c) in t.counts}
            flags = _extreme_flags(vals, min)
            for s, v in vals.items():
                cells.append({"model": m, "stratum": _label(s), "column": c, "mean": v,
                              "n": t.counts[m, s, c], "is_min": flags.get(s, False)})
    return {"metric": t.metric_name, "by": t.by.value, "models": t.models,
            "columns": t.columns, "strata": [_label(s) for s in t.strata], "cells": cells}


@plot_rows.register
def _(t: StratumTable):
    rows = [[m, _label(s), c, _f6(t.cells[m, s, c]), t.counts[m, s, c]]
            for m in t.models for s in t.strata for c in t.columns if (m, s, c) in t.counts]
    return ["model", "stratum", "column", "mean", "n"], rows


@csv_rows.register
def _(rep: ConsistencyReport):
    return ["word", "r"], [[w, _f6(r)] for w, r in rep.per_word_r.items()]


@json_obj.register
def _(rep: ConsistencyReport):
    return {
        "space_word": rep.space_word,
        "space_def": rep.space_def,
        "kind": rep.kind.value,
        "mean_r": _jnum(rep.mean_r),
        "tier_means": {_label(t): _jnum(v) for t, v in rep.tier_means.items()},
        "tier_counts": {_label(t): n for t, n in rep.tier_counts.items()},
        "coverage": rep.coverage,
        "per_word_r": dict(rep.per_word_r),
        "skipped": list(rep.skipped),
    }


@csv_rows.register
def _(g: ConsistencyGrid):
    header = ["source", "stratum"] + list(g.spaces)
    rows = [[s, _label(t)] + [_f2(g.cells[s, t, sp]) for sp in g.spaces]
            for s in g.sources for t in TIER_ORDER]
    return header, rows


@json_obj.register
def _(g: ConsistencyGrid):
    cells = []
    flags_hl = g.high_exceeds_low()
    for s in g.sources:
        for sp in g.spaces:
            vals = {t: g.cells[s, t, sp] for t in TIER_ORDER}
            flags = _extreme_flags(vals, max)
            for t, v in vals.items():
                cells.append({"source": s, "stratum": _label(t), "space": sp,
                              "mean_r": _jnum(v), "n": g.counts[s, t, sp],
                              "is_max": flags.get(t, False)})
    return {
        "kind": g.kind.value,
        "sources": g.sources,
        "spaces": g.spaces,
        "cells": cells,
        "observations": [{"source": s, "space": sp, "high_exceeds_low": flags_hl[s, sp]}
                         for s in g.sources for sp in g.spaces],
    }


@plot_rows.register
def _(g: ConsistencyGrid):
    return ["source", "space", "stratum", "mean_r"], [
        [s, sp, _label(t), _f6(g.cells[s, t, sp])]
        for s in g.sources for sp in g.spaces for t in TIER_ORDER]


@csv_rows.register
def _(m: MeanDistanceMatrix):
    return ["source"] + list(m.sources), [
        [a] + [_f6(m.cells[a, b]) for b in m.sources] for a in m.sources]


@json_obj.register
def _(m: MeanDistanceMatrix):
    return {"kind": m.kind.value, "sources": m.sources,
            "cells": [{"a": a, "b": b, "mean": _jnum(m.cells[a, b]), "n": m.counts[a, b]}
                      for a in m.sources for b in m.sources]}


def render(artifact, fmt):
    """The exact text :func:`emit` would write."""
    fmt = Format(fmt)
    if fmt is Format.JSON:
        obj = _denan(json_obj(artifact))
        return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"
    header, rows = (csv_rows if fmt is Format.CSV else plot_rows)(artifact)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _denan(obj):
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _denan(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_denan(v) for v in obj]
    return obj


def emit(artifact, fmt, path):
    """Write ``artifact`` to ``path``. Output bytes depend only on the artifact."""
    path = Path(path)
    text = render(artifact, fmt)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise DefalignError(f"cannot write {path}: {exc.strerror}") from exc
    return path
