import os
import subprocess
import sys

import numpy as np
import pytest

from defalign import kernels
from defalign.kernels import numpy_impl

from oracles import cosine_textbook, euclid_textbook, lcs_len_bruteforce, levenshtein_dp, \
    pearson_textbook


def _rand_text(rng, n):
    return "".join(rng.choice(list("abc d"), size=n))


@pytest.mark.parametrize("seed", range(5))
def test_string_kernels_agree_with_oracles(impl, seed):
    rng = np.random.default_rng(seed)
    for _ in range(40):
        a = _rand_text(rng, int(rng.integers(0, 30)))
        b = _rand_text(rng, int(rng.integers(0, 30)))
        n, i, j = impl.lcs_codes(kernels.codes(a), kernels.codes(b))
        assert n == lcs_len_bruteforce(a, b)
        assert a[i:i + n] == b[j:j + n]
        assert impl.levenshtein_codes(kernels.codes(a), kernels.codes(b)) == levenshtein_dp(a, b)


@pytest.mark.parametrize("kind", [kernels.COSINE, kernels.EUCLIDEAN])
def test_distance_matrix_against_textbook(impl, kind):
    X = np.random.default_rng(1).normal(size=(7, 5))
    D = impl.distance_matrix(X, kind)
    f = cosine_textbook if kind == kernels.COSINE else euclid_textbook
    for i in range(7):
        assert D[i, i] == 0.0
        for j in range(7):
            if i != j:
                assert D[i, j] == pytest.approx(f(list(X[i]), list(X[j])), abs=1e-12)
    np.testing.assert_array_equal(D, D.T)


def test_row_pearson_against_textbook(impl):
    rng = np.random.default_rng(2)
    A = rng.random((6, 6))
    B = rng.random((6, 6))
    r = impl.row_pearson_offdiag(A, B)
    for i in range(6):
        x = [A[i, j] for j in range(6) if j != i]
        y = [B[i, j] for j in range(6) if j != i]
        assert r[i] == pytest.approx(pearson_textbook(x, y), abs=1e-12)


def test_row_pearson_constant_row_is_nan(impl):
    A = np.ones((4, 4))
    B = np.random.default_rng(0).random((4, 4))
    assert np.isnan(impl.row_pearson_offdiag(A, B)).all()


def test_numpy_parallel_rows_identical():
    X = np.random.default_rng(3).normal(size=(50, 9))
    D1 = numpy_impl.distance_matrix(X, kernels.EUCLIDEAN, jobs=1)
    D4 = numpy_impl.distance_matrix(X, kernels.EUCLIDEAN, jobs=4)
    np.testing.assert_array_equal(D1, D4)


@pytest.mark.skipif("numba" not in kernels.BACKENDS, reason="numba not installed")
def test_backends_agree_on_consistency_inputs():
    nb = kernels.BACKENDS["numba"]
    rng = np.random.default_rng(4)
    X, Y = rng.normal(size=(40, 12)), rng.normal(size=(40, 7))
    for kind in (kernels.COSINE, kernels.EUCLIDEAN):
        DA, DB = nb.distance_matrix(X, kind), nb.distance_matrix(Y, kind)
        np.testing.assert_allclose(DA, numpy_impl.distance_matrix(X, kind), atol=1e-12)
        np.testing.assert_allclose(nb.row_pearson_offdiag(DA, DB),
                                   numpy_impl.row_pearson_offdiag(DA, DB), atol=1e-12)


def _backend_in_subprocess(value):
    env = dict(os.environ, DEFALIGN_BACKEND=value)
    return subprocess.run([sys.executable, "-c", "from defalign import kernels; print(kernels.BACKEND)"],
                          env=env, capture_output=True, text=True)


def test_env_flag_selects_numpy():
    res = _backend_in_subprocess("numpy")
    assert res.returncode == 0 and res.stdout.strip() == "numpy"


def test_env_flag_rejects_unknown():
    res = _backend_in_subprocess("fortran")
    assert res.returncode != 0 and "DEFALIGN_BACKEND" in res.stderr
