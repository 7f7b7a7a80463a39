"""Levenshtein distance kernel.

The hot inner loop is JIT-compiled with numba; set TODKIT_NO_NUMBA=1 to
force the vectorized numpy fallback.  Both paths are exact and share the
same public functions.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("TODKIT_NO_NUMBA", "") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if USE_NUMBA:

    @njit(cache=True)
    def _levenshtein_numba(a: np.ndarray, b: np.ndarray) -> int:
        n = b.shape[0]
        prev = np.arange(n + 1, dtype=np.int64)
        cur = np.empty(n + 1, dtype=np.int64)
        for i in range(a.shape[0]):
            cur[0] = i + 1
            for j in range(1, n + 1):
                cost = 0 if a[i] == b[j - 1] else 1
                best = prev[j - 1] + cost
                if prev[j] + 1 < best:
                    best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                cur[j] = best
            prev, cur = cur, prev
        return prev[n]


def _levenshtein_numpy(a: np.ndarray, b: np.ndarray) -> int:
    n = b.shape[0]
    offsets = np.arange(1, n + 1)
    prev = np.arange(n + 1, dtype=np.int64)
    for i in range(a.shape[0]):
        sub = prev[:-1] + (b != a[i])
        cur = np.minimum(sub, prev[1:] + 1)
        # propagate the left-neighbor (insertion) dependency
        cur = np.minimum.accumulate(
            np.concatenate(([np.int64(i + 1)], cur - offsets))
        )
        prev = cur + np.concatenate(([np.int64(0)], offsets))
    return int(prev[n])


def _encode(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)


def levenshtein(a: str, b: str) -> int:
    """Exact edit distance between two strings."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    xa, xb = _encode(a), _encode(b)
    if USE_NUMBA:
        return int(_levenshtein_numba(xa, xb))
    return _levenshtein_numpy(xa, xb)


def similarity(a: str, b: str) -> float:
    """Normalized edit similarity 1 - dist / max(len); 1.0 for two empties."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest
