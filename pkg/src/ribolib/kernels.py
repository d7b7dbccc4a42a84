"""Hot folding kernels: base-pair-maximization DP and its traceback.

Two interchangeable table builders exist: a plain-loop version compiled with
numba, and a vectorized numpy version used as fallback. Both produce
identical tables (same recurrence, integer max). Selection happens at import
time: set ``RIBOLIB_DISABLE_NUMBA=1`` to force the numpy path. The traceback
shares one source and is jitted only when numba is active.

benchmarks/bench_fold.py compares the two paths.
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_FLAG = "RIBOLIB_DISABLE_NUMBA"

NUMBA_ENABLED = os.environ.get(DISABLE_FLAG, "0") not in ("1", "true", "yes")
if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

# A=0 C=1 G=2 U=3; Watson-Crick plus GU wobble.
CODE_OF = {"A": 0, "C": 1, "G": 2, "U": 3}
BASE_OF = "ACGU"


def pairable_matrix() -> np.ndarray:
    m = np.zeros((4, 4), dtype=np.uint8)
    for a, b in ((0, 3), (3, 0), (1, 2), (2, 1), (2, 3), (3, 2)):
        m[a, b] = 1
    return m


PAIRABLE_MATRIX = pairable_matrix()


def seq_to_codes(seq: str) -> np.ndarray:
    return np.frombuffer(
        bytes(CODE_OF[c] for c in seq), dtype=np.uint8
    ).astype(np.int8)


def _nussinov_table_loops(codes, pairable, min_loop):
    # dp[i, j] = max pairs in codes[i..j], pairs (i, k) need k - i > min_loop
    n = codes.shape[0]
    dp = np.zeros((n, n), dtype=np.int32)
    for s in range(min_loop + 1, n):
        for i in range(n - s):
            j = i + s
            best = dp[i + 1, j]
            for k in range(i + min_loop + 1, j + 1):
                if pairable[codes[i], codes[k]]:
                    v = 1
                    if k - 1 >= i + 1:
                        v += dp[i + 1, k - 1]
                    if k + 1 <= j:
                        v += dp[k + 1, j]
                    if v > best:
                        best = v
            dp[i, j] = best
    return dp


def nussinov_table_numpy(codes, pairable, min_loop):
    """Vectorized table builder; one numpy op per (span, pair-offset)."""
    n = codes.shape[0]
    dp = np.zeros((n, n), dtype=np.int32)
    if n <= min_loop + 1:
        return dp
    flat = dp.reshape(-1)

    def diag(d):
        # view of dp[t, t + d] for t in range(n - d)
        return flat[d :: n + 1][: n - d]

    # ok[m][i] <=> codes[i] pairs codes[i + m]
    ok = [None] * n
    for m in range(min_loop + 1, n):
        ok[m] = pairable[codes[: n - m], codes[m:]].astype(bool)

    for s in range(min_loop + 1, n):
        length = n - s
        best = diag(s - 1)[1 : 1 + length].copy()
        for m in range(min_loop + 1, s + 1):
            if m >= 2:
                left = diag(m - 2)[1 : 1 + length]
            else:
                left = 0
            if m == s:
                right = 0
            else:
                right = diag(s - m - 1)[m + 1 : m + 1 + length]
            cand = left + right + 1
            np.maximum(best, np.where(ok[m][:length], cand, -1), out=best)
        diag(s)[:] = best
    return dp


def _traceback_loops(dp, codes, pairable, min_loop):
    # Deterministic: at [i, j] try pairing i with the smallest admissible k
    # before leaving i unpaired.
    n = codes.shape[0]
    partner = np.full(n, -1, dtype=np.int32)
    stack = np.empty((2 * n + 4, 2), dtype=np.int32)
    top = 0
    if n > 1:
        stack[top, 0] = 0
        stack[top, 1] = n - 1
        top = 1
    while top > 0:
        top -= 1
        i = stack[top, 0]
        j = stack[top, 1]
        while i < j and dp[i, j] > 0:
            paired = False
            for k in range(i + min_loop + 1, j + 1):
                if pairable[codes[i], codes[k]]:
                    v = 1
                    if k - 1 >= i + 1:
                        v += dp[i + 1, k - 1]
                    if k + 1 <= j:
                        v += dp[k + 1, j]
                    if v == dp[i, j]:
                        partner[i] = k
                        partner[k] = i
                        if k + 1 <= j:
                            stack[top, 0] = k + 1
                            stack[top, 1] = j
                            top += 1
                        i, j = i + 1, k - 1
                        paired = True
                        break
            if not paired:
                i += 1
    return partner


if NUMBA_ENABLED:
    nussinov_table = njit(cache=True)(_nussinov_table_loops)
    nussinov_traceback = njit(cache=True)(_traceback_loops)
else:
    nussinov_table = nussinov_table_numpy
    nussinov_traceback = _traceback_loops


def fold_codes(codes: np.ndarray, min_loop: int) -> np.ndarray:
    """Partner array of one optimal nested pairing of ``codes``."""
    dp = nussinov_table(codes, PAIRABLE_MATRIX, min_loop)
    return nussinov_traceback(dp, codes, PAIRABLE_MATRIX, min_loop)
