"""Pure-numpy kernels. Semantics are identical to the numba versions."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

COSINE = 0
EUCLIDEAN = 1

# bytes of float64 scratch per euclidean row block
_BLOCK_BYTES = 32 * 1024 * 1024


def lcs_codes(a, b):
    """Longest common substring of two code-point arrays.

    Returns ``(length, start_a, start_b)``. Ties go to the smallest start in
    ``a``, then the smallest start in ``b``.
    """
    n, m = a.shape[0], b.shape[0]
    best, best_i, best_j = 0, 0, 0
    if n == 0 or m == 0:
        return 0, 0, 0
    prev = np.zeros(m + 1, dtype=np.int64)
    cur = np.zeros(m + 1, dtype=np.int64)
    for i in range(n):
        cur[0] = 0
        np.multiply(prev[:-1] + 1, a[i] == b, out=cur[1:])
        j = int(cur.argmax())
        if cur[j] > best:
            best = int(cur[j])
            best_i, best_j = i + 1, j
        prev, cur = cur, prev
    return best, best_i - best, best_j - best


def levenshtein_codes(a, b):
    """Unit-cost Levenshtein distance, one vectorised row per character of ``a``.

    The insertion chain ``cur[j] = min(cur[j-1] + 1, t[j])`` is a running
    minimum of ``t[k] - k`` shifted back by ``j``.
    """
    n, m = a.shape[0], b.shape[0]
    if n == 0:
        return m
    if m == 0:
        return n
    idx = np.arange(m + 1, dtype=np.int64)
    prev = idx.copy()
    for i in range(n):
        t = np.empty(m + 1, dtype=np.int64)
        t[0] = i + 1
        np.minimum(prev[1:] + 1, prev[:-1] + (a[i] != b), out=t[1:])
        prev = np.minimum.accumulate(t - idx) + idx
    return int(prev[m])


def _euclidean_rows(X, lo, hi, out):
    for i0 in range(lo, hi, _rows_per_block(X)):
        i1 = min(hi, i0 + _rows_per_block(X))
        diff = X[i0:i1, None, :] - X[None, :, :]
        out[i0:i1] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _rows_per_block(X):
    n, d = X.shape
    return max(1, _BLOCK_BYTES // max(1, n * d * 8))


def distance_matrix(X, kind, jobs=1):
    """All-pairs distances between the rows of ``X`` (n x n, zero diagonal)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    if kind == COSINE:
        U = X / np.linalg.norm(X, axis=1)[:, None]
        D = 1.0 - U @ U.T
        np.clip(D, 0.0, 2.0, out=D)
    else:
        D = np.empty((n, n), dtype=np.float64)
        if jobs > 1 and n > 1:
            edges = np.linspace(0, n, jobs + 1).astype(int)
            with ThreadPoolExecutor(jobs) as pool:
                list(pool.map(lambda k: _euclidean_rows(X, edges[k], edges[k + 1], D),
                              range(jobs)))
        else:
            _euclidean_rows(X, 0, n, D)
    D = np.minimum(D, D.T)
    np.fill_diagonal(D, 0.0)
    return D


def row_pearson_offdiag(DA, DB, jobs=1):
    """Per-row Pearson r between ``DA[i, j != i]`` and ``DB[i, j != i]``.

    Undefined rows (either side constant) are NaN.
    """
    n = DA.shape[0]
    if n < 3:
        return np.full(n, np.nan)
    keep = ~np.eye(n, dtype=bool)
    X = DA[keep].reshape(n, n - 1)
    Y = DB[keep].reshape(n, n - 1)
    X = X - X.mean(axis=1, keepdims=True)
    Y = Y - Y.mean(axis=1, keepdims=True)
    sxy = np.einsum("ij,ij->i", X, Y)
    sxx = np.einsum("ij,ij->i", X, X)
    syy = np.einsum("ij,ij->i", Y, Y)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = sxy / np.sqrt(sxx * syy)
    r[(sxx == 0.0) | (syy == 0.0)] = np.nan
    return np.clip(r, -1.0, 1.0)
