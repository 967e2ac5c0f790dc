import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from defalign.errors import ArityError, BoundsError, DomainError
from defalign.ingest import DefinitionRecord, EmbeddingTable, SourceId
from defalign.vectorspace import (DistanceKind, PairDistanceTable, cosine_distance,
                                  euclidean_distance, mean_distance_matrix, outlier_worksheet,
                                  pair_distances, topk_outliers)

from oracles import euclid_textbook


def test_cosine_examples():
    assert cosine_distance([1, 2], [1, 2]) == 0
    assert cosine_distance([1, 0], [0, 1]) == 1
    assert cosine_distance([1, 2, 3], [2, 4, 6]) == 0
    assert cosine_distance([1, 0], [-1, 0]) == 2


def test_cosine_errors():
    with pytest.raises(DomainError):
        cosine_distance([0, 0], [1, 1])
    with pytest.raises(ArityError):
        cosine_distance([1, 0], [1, 0, 0])


def test_euclidean_examples():
    assert euclidean_distance([1, 1], [1, 1]) == 0
    assert euclidean_distance([0, 0], [3, 4]) == 5
    with pytest.raises(ArityError):
        euclidean_distance([1], [1, 2])
    rng = np.random.default_rng(0)
    u, v = rng.normal(size=10), rng.normal(size=10)
    assert euclidean_distance(u, v) == pytest.approx(euclid_textbook(u, v), abs=1e-12)


vec3 = st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=3)


@settings(max_examples=200, deadline=None)
@given(vec3, vec3, vec3)
def test_euclidean_metric_axioms(a, b, c):
    dab = euclidean_distance(a, b)
    assert dab >= 0 and dab == pytest.approx(euclidean_distance(b, a), abs=1e-12)
    assert euclidean_distance(a, c) <= dab + euclidean_distance(b, c) + 1e-9


def _table(name, d):
    return EmbeddingTable.from_dict(name, d)


def test_pair_distances_identical_is_zero():
    t = _table("a", {"x": [1, 2], "y": [3, 1]})
    assert pair_distances(t, t, ["x", "y"]).entries == {"x": 0.0, "y": 0.0}


def test_pair_distances_hand_fixture():
    a = _table("a", {"p": [1, 0], "q": [0, 1], "r": [1, 1], "s": [2, 0], "t": [3, 4]})
    b = _table("b", {"p": [0, 1], "q": [0, 2], "r": [-1, -1], "s": [1, 1], "t": [3, 4]})
    t = pair_distances(a, b, list("pqrst"), DistanceKind.COSINE)
    assert t.entries["p"] == 1.0
    assert t.entries["q"] == 0.0
    assert t.entries["r"] == 2.0
    assert t.entries["s"] == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-15)
    assert t.entries["t"] == 0.0
    e = pair_distances(a, b, list("pqrst"), DistanceKind.EUCLIDEAN)
    assert e.entries["p"] == pytest.approx(math.sqrt(2))
    assert e.entries["s"] == pytest.approx(math.sqrt(2))
    assert all(0 <= v <= 2 for v in t.entries.values())


def test_pair_distances_skips_missing():
    a = _table("a", {"x": [1, 0]})
    b = _table("b", {"x": [1, 1], "y": [0, 1]})
    t = pair_distances(a, b, ["x", "y"])
    assert list(t.entries) == ["x"] and t.skipped == ["y"]


def test_topk():
    t = PairDistanceTable("a", "b", DistanceKind.COSINE, {"a": 0.1, "b": 0.9, "c": 0.5})
    assert topk_outliers(t, 2) == [("b", 0.9), ("c", 0.5)]
    assert [w for w, _ in topk_outliers(t, 3)] == ["b", "c", "a"]
    with pytest.raises(BoundsError):
        topk_outliers(t, 4)


def test_topk_ties_lexicographic():
    t = PairDistanceTable("a", "b", DistanceKind.COSINE, {"z": 0.5, "m": 0.5, "a": 0.1})
    assert [w for w, _ in topk_outliers(t, 2)] == ["m", "z"]


def test_topk_is_prefix_of_full_sort():
    rng = np.random.default_rng(5)
    words = [f"w{i:04d}" for i in range(2512)]
    entries = {w: float(d) for w, d in zip(words, rng.random(2512))}
    t = PairDistanceTable("merriam", "gpt4-1", DistanceKind.EUCLIDEAN, entries)
    top = topk_outliers(t, 50)
    full = sorted(entries.items(), key=lambda kv: (-kv[1], kv[0]))
    assert top == full[:50]
    defs_a = [DefinitionRecord(w, SourceId("merriam"), f"m {w}") for w in words]
    defs_b = [DefinitionRecord(w, SourceId.infer("gpt4-1"), f"g {w}") for w in words]
    ws = outlier_worksheet(t, 50, defs_a, defs_b)
    assert len(ws.rows) == 50
    assert [r.rank for r in ws.rows] == list(range(1, 51))
    assert all(r.def_a == f"m {r.word}" and r.def_b == f"g {r.word}" for r in ws.rows)


def test_mean_distance_matrix():
    a = _table("a", {"x": [1, 0], "y": [0, 1]})
    b = _table("b", {"x": [0, 1], "y": [0, 1]})
    m = mean_distance_matrix({"a": a, "b": b}, ["x", "y"])
    assert m.cells["a", "a"] == 0 and m.cells["a", "b"] == 0.5
    assert m.counts["a", "b"] == 2
