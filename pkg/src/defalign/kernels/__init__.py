"""Hot loops, compiled with numba when available.

Set ``DEFALIGN_BACKEND=numpy`` before import to force the pure-numpy path
(useful where numba is missing or for cross-checking). The default is
``numba`` and silently degrades to ``numpy`` if numba cannot be imported.
"""

import logging
import os
import warnings

import numpy as np

from . import numpy_impl

log = logging.getLogger(__name__)

COSINE = numpy_impl.COSINE
EUCLIDEAN = numpy_impl.EUCLIDEAN

# raised on the first parallel launch when an old libtbb is installed; numba
# then falls back to another threading layer on its own
warnings.filterwarnings("ignore", message="The TBB threading layer requires")

try:
    from . import numba_impl
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_impl = None

BACKENDS = {"numpy": numpy_impl}
if numba_impl is not None:
    BACKENDS["numba"] = numba_impl

_requested = os.environ.get("DEFALIGN_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"DEFALIGN_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
if _requested == "numba" and numba_impl is None:  # pragma: no cover
    log.warning("numba unavailable; falling back to numpy kernels")
    _requested = "numpy"

BACKEND = _requested
_impl = BACKENDS[BACKEND]


def set_threads(jobs):
    """Bound numba's parallel regions to ``jobs`` threads; returns the count used."""
    jobs = max(1, int(jobs))
    if BACKEND == "numba":
        import numba

        jobs = min(jobs, numba.config.NUMBA_NUM_THREADS)
        numba.set_num_threads(jobs)
    return jobs


def codes(text):
    """Unicode code points of ``text`` as an int32 array."""
    return np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32).astype(np.int32)


def lcs_codes(a, b):
    return _impl.lcs_codes(a, b)


def levenshtein_codes(a, b):
    return int(_impl.levenshtein_codes(a, b))


def distance_matrix(X, kind, jobs=1):
    return _impl.distance_matrix(X, kind, jobs)


def row_pearson_offdiag(DA, DB, jobs=1):
    return _impl.row_pearson_offdiag(DA, DB, jobs)
