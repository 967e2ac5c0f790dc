"""Time the numba and numpy kernel backends on the same workloads.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--words 2512] [--dim 300]

Each backend runs in its own interpreter because the backend is fixed at
import time by DEFALIGN_BACKEND.
"""

import argparse
import json
import os
import subprocess
import sys

_CHILD = r"""
import json, random, sys, time
import numpy as np
from defalign import kernels
from defalign.consistency import space_consistency
from defalign.ingest import EmbeddingTable
from defalign.surface import edit_distance, lcs

repeat, n_words, dim = map(int, sys.argv[1:4])
rng = random.Random(0)
texts = ["".join(rng.choice("abcdefgh ") for _ in range(rng.randint(50, 400))) for _ in range(400)]
pairs = list(zip(texts[::2], texts[1::2]))
gen = np.random.default_rng(0)
words = [f"w{i:05d}" for i in range(n_words)]
a = EmbeddingTable("a", words, gen.normal(size=(n_words, dim)))
b = EmbeddingTable("b", words, gen.normal(size=(n_words, dim)))

def best(fn):
    fn()  # warm-up (JIT compile / cache load)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

out = {
    "lcs_200_pairs": best(lambda: [lcs(x, y) for x, y in pairs]),
    "levenshtein_200_pairs": best(lambda: [edit_distance(x, y) for x, y in pairs]),
    "consistency_cosine": best(lambda: space_consistency(a, b, words, "cosine")),
    "consistency_euclidean": best(lambda: space_consistency(a, b, words, "euclidean")),
}
print(json.dumps({"backend": kernels.BACKEND, "times": out}))
"""


def run(backend, args):
    env = dict(os.environ, DEFALIGN_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", _CHILD, str(args.repeat), str(args.words),
                           str(args.dim)], env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--words", type=int, default=2512)
    p.add_argument("--dim", type=int, default=300)
    p.add_argument("--json", action="store_true", help="print raw JSON")
    args = p.parse_args(argv)
    results = {b: run(b, args)["times"] for b in ("numba", "numpy")}
    if args.json:
        print(json.dumps(results, indent=2))
        return
    print(f"{'workload':<24}{'numba s':>10}{'numpy s':>10}{'numpy/numba':>13}")
    for name in results["numba"]:
        nb, npy = results["numba"][name], results["numpy"][name]
        print(f"{name:<24}{nb:>10.4f}{npy:>10.4f}{npy / nb:>13.2f}")


if __name__ == "__main__":
    main()
