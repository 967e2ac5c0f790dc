"""numba-compiled kernels. Same contracts as :mod:`numpy_impl`."""

import math

import numpy as np
from numba import njit, prange

COSINE = 0
EUCLIDEAN = 1


@njit(cache=True, nogil=True)
def lcs_codes(a, b):
    n = a.shape[0]
    m = b.shape[0]
    if n == 0 or m == 0:
        return 0, 0, 0
    prev = np.zeros(m + 1, dtype=np.int64)
    cur = np.zeros(m + 1, dtype=np.int64)
    best = 0
    best_i = 0
    best_j = 0
    for i in range(n):
        ai = a[i]
        for j in range(m):
            if ai == b[j]:
                v = prev[j] + 1
                cur[j + 1] = v
                if v > best:
                    best = v
                    best_i = i + 1
                    best_j = j + 1
            else:
                cur[j + 1] = 0
        prev, cur = cur, prev
    return best, best_i - best, best_j - best


@njit(cache=True, nogil=True)
def levenshtein_codes(a, b):
    n = a.shape[0]
    m = b.shape[0]
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1).astype(np.int64)
    cur = np.empty(m + 1, dtype=np.int64)
    for i in range(n):
        cur[0] = i + 1
        ai = a[i]
        for j in range(m):
            sub = prev[j] + (0 if ai == b[j] else 1)
            dele = prev[j + 1] + 1
            ins = cur[j] + 1
            v = sub if sub < dele else dele
            cur[j + 1] = v if v < ins else ins
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True, parallel=True)
def _distance_matrix(X, kind):
    n, d = X.shape
    D = np.zeros((n, n), dtype=np.float64)
    norms = np.empty(n, dtype=np.float64)
    for i in range(n):
        s = 0.0
        for k in range(d):
            s += X[i, k] * X[i, k]
        norms[i] = math.sqrt(s)
    for i in prange(n):
        for j in range(i + 1, n):
            if kind == 0:
                s = 0.0
                for k in range(d):
                    s += X[i, k] * X[j, k]
                v = 1.0 - s / (norms[i] * norms[j])
                if v < 0.0:
                    v = 0.0
                elif v > 2.0:
                    v = 2.0
            else:
                s = 0.0
                for k in range(d):
                    t = X[i, k] - X[j, k]
                    s += t * t
                v = math.sqrt(s)
            D[i, j] = v
            D[j, i] = v
    return D


def distance_matrix(X, kind, jobs=1):
    return _distance_matrix(np.ascontiguousarray(X, dtype=np.float64), kind)


@njit(cache=True, parallel=True)
def _row_pearson_offdiag(DA, DB):
    n = DA.shape[0]
    r = np.empty(n, dtype=np.float64)
    for i in prange(n):
        if n < 3:
            r[i] = np.nan
            continue
        mx = 0.0
        my = 0.0
        for j in range(n):
            if j != i:
                mx += DA[i, j]
                my += DB[i, j]
        mx /= n - 1
        my /= n - 1
        sxy = 0.0
        sxx = 0.0
        syy = 0.0
        for j in range(n):
            if j != i:
                dx = DA[i, j] - mx
                dy = DB[i, j] - my
                sxy += dx * dy
                sxx += dx * dx
                syy += dy * dy
        if sxx == 0.0 or syy == 0.0:
            r[i] = np.nan
        else:
            v = sxy / math.sqrt(sxx * syy)
            r[i] = min(1.0, max(-1.0, v))
    return r


def row_pearson_offdiag(DA, DB, jobs=1):
    return _row_pearson_offdiag(np.ascontiguousarray(DA), np.ascontiguousarray(DB))
