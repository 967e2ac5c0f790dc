"""Acceptance gate: one test per criterion, each at its stated tolerance.

A ``criterion N: PASS/FAIL`` line per criterion is printed in the terminal
summary of any pytest run that includes this file.
"""

import filecmp
import json
import math
import os
import random
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from defalign.cli import main
from defalign.consistency import space_consistency
from defalign.ingest import EmbeddingTable, load_definitions, load_vectors, VectorFormat
from defalign.lexicon import Tier, TierConfig, load_lexicon, read_sampled, sample_tiers
from defalign.netclient import Client, ClientConfig, RateGate, fetch_definition
from defalign.report import Stratum, stratify
from defalign.surface import edit_distance, lcs, norm_edit_distance
from defalign.synthetic import write_lexicon
from defalign.vectorspace import DistanceKind, cosine_distance, pair_distances

from conftest import FIXTURE60, GOLDEN
from make_golden import golden_files
from oracles import (consistency_bruteforce, cosine_textbook, euclid_textbook,
                     lcs_len_bruteforce, levenshtein_dp)
from test_cli import analyze_args
from test_netclient import FakeClock, _max_in_window


def _detail(request, text):
    request.node.user_properties.append(("detail", text))


def _rand_text(rng, alphabet, max_len):
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, max_len)))


@pytest.mark.criterion(1, "LCS equals brute-force oracle on 1000 pairs, < 10 s")
def test_c1_lcs_oracle(request):
    rng = random.Random(1)
    pairs = [(_rand_text(rng, "abcde ", 60), _rand_text(rng, "abcde ", 60)) for _ in range(1000)]
    t0 = time.perf_counter()
    results = [lcs(a, b) for a, b in pairs]
    elapsed = time.perf_counter() - t0
    for (a, b), m in zip(pairs, results):
        assert m.char_len == lcs_len_bruteforce(a, b)
        assert a[m.pos_a:m.pos_a + m.char_len] == m.substring == b[m.pos_b:m.pos_b + m.char_len]
    assert elapsed < 10
    _detail(request, f"{elapsed:.3f}s")


@pytest.mark.criterion(2, "edit distance equals DP oracle; symmetry, triangle, [0,1] range")
def test_c2_edit_distance():
    rng = random.Random(2)
    for _ in range(1000):
        a, b = _rand_text(rng, "abcde ", 40), _rand_text(rng, "abcde ", 40)
        assert edit_distance(a, b) == levenshtein_dp(a, b)
        assert 0.0 <= norm_edit_distance(a, b) <= 1.0
    for _ in range(1000):
        a, b, c = (_rand_text(rng, "abc", 25) for _ in range(3))
        ab = edit_distance(a, b)
        assert ab == edit_distance(b, a)
        assert edit_distance(a, c) <= ab + edit_distance(b, c)
        assert (ab == 0) == (a == b)


@pytest.mark.criterion(3, "cosine scale invariance within 1e-9, range [0,2], exact cases")
def test_c3_cosine():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(2, 50))
        u, v = rng.normal(size=d), rng.normal(size=d)
        s, t = np.exp(rng.uniform(-5, 5, size=2))
        base = cosine_distance(u, v)
        worst = max(worst, abs(cosine_distance(s * u, t * v) - base))
        assert 0.0 <= base <= 2.0
        assert base == pytest.approx(cosine_textbook(u, v), abs=1e-12)
    assert worst <= 1e-9
    assert cosine_distance([1, 0], [0, 1]) == 1.0
    assert cosine_distance([1, 2], [1, 2]) == 0.0
    assert cosine_distance([3, -1], [-3, 1]) == 2.0


@pytest.mark.criterion(4, "consistency: identity, orthogonal+scale invariance 1e-6, oracle 1e-12")
@pytest.mark.parametrize("kind", list(DistanceKind))
def test_c4_consistency(request, backend, kind):
    rng = np.random.default_rng(4)
    words = [f"w{i:02d}" for i in range(20)]
    worst = 0.0
    for _ in range(100):
        m = rng.normal(size=(20, 10))
        a = EmbeddingTable("a", words, m)
        same = space_consistency(a, a, words, kind)
        assert same.mean_r == pytest.approx(1.0, abs=1e-9)
        other = EmbeddingTable("b", words, rng.normal(size=(20, 10)))
        q, _ = np.linalg.qr(rng.normal(size=(10, 10)))
        moved = EmbeddingTable("a2", words, float(np.exp(rng.uniform(-3, 3))) * (m @ q))
        r1 = space_consistency(a, other, words, kind).per_word_r
        r2 = space_consistency(moved, other, words, kind).per_word_r
        worst = max(worst, max(abs(r1[w] - r2[w]) for w in words))
    assert worst <= 1e-6
    dist = cosine_textbook if kind is DistanceKind.COSINE else euclid_textbook
    for _ in range(20):
        five = words[:5]
        x, y = rng.normal(size=(5, 4)), rng.normal(size=(5, 6))
        expected = consistency_bruteforce(dict(zip(five, x.tolist())),
                                          dict(zip(five, y.tolist())), dist)
        got = space_consistency(EmbeddingTable("x", five, x), EmbeddingTable("y", five, y),
                                five, kind).per_word_r
        assert all(abs(got[w] - expected[w]) <= 1e-12 for w in five)
    _detail(request, f"{kind.value}/{backend}: worst invariance drift {worst:.1e}")


def _bundle(tmp, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    assert main(analyze_args(tmp)) == 0
    return sorted(p.relative_to(tmp) for p in Path(tmp).rglob("*") if p.is_file())


@pytest.mark.criterion(5, "fixture bundle byte-identical across runs, matches golden CSVs, recombines 1e-9")
def test_c5_determinism_golden(request, tmp_path, monkeypatch):
    a, b = tmp_path / "a", tmp_path / "b"
    files_a, files_b = _bundle(a, monkeypatch), _bundle(b, monkeypatch)
    assert files_a == files_b
    for rel in files_a:
        if rel.name == "manifest.json":
            ma, mb = (json.loads((d / rel).read_text())["runs"]["analyze"] for d in (a, b))
            for m in (ma, mb):
                m["config"].pop("out")
            assert ma == mb
        else:
            assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel
    golden = golden_files(GOLDEN)
    assert golden and golden == golden_files(a)
    _, mismatch, errors = filecmp.cmpfiles(GOLDEN, a, [str(p) for p in golden], shallow=False)
    assert not mismatch and not errors, mismatch + errors

    entries = read_sampled(FIXTURE60 / "lexicon.tsv")
    vocab = [e.word for e in entries]
    defvec = {n: load_vectors(FIXTURE60 / "defvec" / f"{n}.vec", VectorFormat.HEADERED, n)
              for n in ("merriam", "gpt4-1")}
    t = pair_distances(defvec["gpt4-1"], defvec["merriam"], vocab)
    glob_mean = math.fsum(t.entries.values()) / len(t.entries)
    for by in Stratum:
        st = stratify(t, entries, by)
        assert abs(st.mean_of("gpt4-1", "merriam") - glob_mean) <= 1e-9
    _detail(request, f"{len(files_a)} files, {len(golden)} golden CSVs")


@pytest.mark.criterion(6, "default sampling of a 50,500-word lexicon gives 1000/1000/1000")
def test_c6_sampling(request, tmp_path):
    path = tmp_path / "lex.txt"
    write_lexicon(path, 50_500, seed=6)
    entries = sample_tiers(load_lexicon(path), TierConfig())
    counts = {t: sum(e.tier is t for e in entries) for t in Tier}
    assert len(entries) == 3000
    assert counts == {Tier.HIGH: 1000, Tier.MEDIUM: 1000, Tier.LOW: 1000}
    _detail(request, ", ".join(f"{t.value}={n}" for t, n in counts.items()))


@pytest.mark.criterion(7, "mock-server conformance: prompts, 429 retries, cache, rate window")
def test_c7_netclient(mock_provider, tmp_path):
    def cfg(**kw):
        return ClientConfig(base_url=mock_provider.url, model_name="gpt-4",
                            api_key_env="DEFALIGN_TEST_KEY", cache_dir=str(tmp_path / "c"),
                            requests_per_minute=10_000, **kw)

    for ptype, text in ((1, b"What is the meaning of this word? kelvin"),
                        (2, b"Define this word. kelvin")):
        fetch_definition("kelvin", cfg(prompt_type=ptype))
        sent = mock_provider.bodies[-1][1]["messages"][0]["content"].encode("utf-8")
        assert sent == text

    mock_provider.script = [429, 429]
    clock = FakeClock()
    before = mock_provider.hits
    client = Client(cfg(backoff_base=0.5), sleep=clock.sleep)
    client.fetch_definition("meter")
    assert mock_provider.hits - before == 3 and clock.sleeps == [0.5, 1.0]

    before = mock_provider.hits
    for _ in range(3):
        Client(cfg()).fetch_definition("meter")
    assert mock_provider.hits == before

    for rpm, n in ((60, 120), (2, 3), (1, 1), (7, 50)):
        clock = FakeClock()
        gate = RateGate(rpm, clock, clock.sleep)
        grants = [gate.acquire() for _ in range(n)]
        assert _max_in_window(grants) <= rpm


_PERF_SCRIPT = r"""
import json, resource, sys, time, tracemalloc
import numpy as np
from defalign import EmbeddingTable, space_consistency
jobs = int(sys.argv[1])
rng = np.random.default_rng(8)
words = [f"w{i:04d}" for i in range(2512)]
a = EmbeddingTable("word", words, rng.normal(size=(2512, 300)))
b = EmbeddingTable("def", words, rng.normal(size=(2512, 300)))
space_consistency(a, b, words[:8], jobs=jobs)  # compile outside the clock
tracemalloc.start()
t0 = time.perf_counter()
rep = space_consistency(a, b, words, jobs=jobs)
elapsed = time.perf_counter() - t0
traced = tracemalloc.get_traced_memory()[1]
rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
print(json.dumps({"elapsed": elapsed, "traced": traced, "rss": rss, "n": len(rep.per_word_r)}))
"""


@pytest.mark.criterion(8, "2512 x 300 consistency < 60 s (1 job), < 15 s (8 jobs), < 2 GB")
@pytest.mark.parametrize("jobs,budget", [(1, 60.0), (8, 15.0)])
def test_c8_performance(request, jobs, budget):
    env = dict(os.environ, NUMBA_NUM_THREADS=str(jobs))
    out = subprocess.run([sys.executable, "-c", _PERF_SCRIPT, str(jobs)], env=env,
                         capture_output=True, text=True, check=True)
    stats = json.loads(out.stdout.strip().splitlines()[-1])
    assert stats["n"] == 2512
    assert stats["elapsed"] < budget
    assert stats["rss"] < 2 * 1024 ** 3 and stats["traced"] < 2 * 1024 ** 3
    _detail(request, f"jobs={jobs}: {stats['elapsed']:.2f}s, peak rss "
                     f"{stats['rss'] / 2 ** 20:.0f} MB, cpus={os.cpu_count()}")


@pytest.mark.criterion(9, "analyze emits a complete tiers x spaces grid; high>low reported, not asserted")
def test_c9_grid_observation(request, tmp_path):
    assert main(analyze_args(tmp_path, "--only", "consistency")) == 0
    grid = json.loads((tmp_path / "consistency_grid.json").read_text())
    assert len(grid["cells"]) == len(grid["sources"]) * len(grid["spaces"]) * 3
    assert all(c["mean_r"] is not None for c in grid["cells"])
    flags = [o["high_exceeds_low"] for o in grid["observations"]]
    assert all(isinstance(f, bool) for f in flags)
    _detail(request, f"high_exceeds_low true for {sum(flags)}/{len(flags)} source-space pairs")
