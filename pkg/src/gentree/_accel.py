"""Hot numeric kernels.

Each kernel exists twice: a numba ``@njit`` loop and a vectorised numpy
version.  The numba path is used when numba imports cleanly and the
``GENTREE_NO_NUMBA`` environment variable is unset (or ``0``).  Both paths
must return identical results; the test-suite checks this directly.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("GENTREE_NO_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:  # pragma: no cover - depends on the environment
    if _DISABLED:
        raise ImportError("numba disabled by GENTREE_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

# rows per chunk for the broadcasting fallback of cube matching
_CHUNK = 4096


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

def np_label_counts(X: np.ndarray, y: np.ndarray, max_values: int) -> np.ndarray:
    """counts[j, v, c] = number of rows with X[:, j] == v and label c."""
    n, k = X.shape
    out = np.zeros((k, max_values, 2), dtype=np.int64)
    if n == 0:
        return out
    keys = X.astype(np.int64) * 2 + y.astype(np.int64)[:, None]
    for j in range(k):
        out[j] = np.bincount(keys[:, j], minlength=2 * max_values).reshape(max_values, 2)
    return out


def np_match_cubes(X: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """True for rows of ``X`` that lie inside at least one cube.

    A cube is a row of per-option value bitmasks: bit ``v`` of ``masks[c, j]``
    is set when value index ``v`` of option ``j`` is allowed.
    """
    n = X.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    if n == 0 or masks.shape[0] == 0:
        return out
    bits = np.left_shift(np.int64(1), X.astype(np.int64))
    for start in range(0, n, _CHUNK):
        b = bits[start:start + _CHUNK]
        inside = (b[:, None, :] & masks[None, :, :]) != 0
        out[start:start + _CHUNK] = inside.all(axis=2).any(axis=1)
    return out


def np_decode(flat: np.ndarray, radices: np.ndarray) -> np.ndarray:
    """Mixed-radix decode, most significant digit first."""
    flat = np.asarray(flat, dtype=np.int64)
    out = np.empty((flat.shape[0], radices.shape[0]), dtype=np.int64)
    rem = flat.copy()
    for j in range(radices.shape[0] - 1, -1, -1):
        out[:, j] = rem % radices[j]
        rem //= radices[j]
    return out


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def nb_label_counts(X, y, max_values):
        n, k = X.shape
        out = np.zeros((k, max_values, 2), dtype=np.int64)
        for i in range(n):
            c = y[i]
            for j in range(k):
                out[j, X[i, j], c] += 1
        return out

    @njit(cache=True)
    def nb_match_cubes(X, masks):
        n, k = X.shape
        m = masks.shape[0]
        out = np.zeros(n, dtype=np.bool_)
        for i in range(n):
            for c in range(m):
                ok = True
                for j in range(k):
                    if (masks[c, j] >> X[i, j]) & 1 == 0:
                        ok = False
                        break
                if ok:
                    out[i] = True
                    break
        return out

    @njit(cache=True)
    def nb_decode(flat, radices):
        n = flat.shape[0]
        k = radices.shape[0]
        out = np.empty((n, k), dtype=np.int64)
        for i in range(n):
            rem = flat[i]
            for j in range(k - 1, -1, -1):
                out[i, j] = rem % radices[j]
                rem //= radices[j]
        return out

else:  # pragma: no cover
    nb_label_counts = nb_match_cubes = nb_decode = None


def _pick(nb, fallback):
    return nb if HAVE_NUMBA else fallback


_label_counts = _pick(nb_label_counts, np_label_counts)
_match_cubes = _pick(nb_match_cubes, np_match_cubes)
_decode = _pick(nb_decode, np_decode)


def label_counts(X: np.ndarray, y: np.ndarray, max_values: int) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.int64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    return _label_counts(X, y, int(max_values))


def match_cubes(X: np.ndarray, masks: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.int64)
    masks = np.ascontiguousarray(masks, dtype=np.int64)
    if X.ndim != 2:
        raise ValueError("X must be two-dimensional")
    if masks.size == 0:
        return np.zeros(X.shape[0], dtype=np.bool_)
    return _match_cubes(X, masks)


def decode(flat: np.ndarray, radices) -> np.ndarray:
    flat = np.ascontiguousarray(flat, dtype=np.int64)
    radices = np.ascontiguousarray(radices, dtype=np.int64)
    return _decode(flat, radices)


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
