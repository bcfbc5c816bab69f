"""Pure NumPy fallback for the compiled hamming kernel (same interface)."""

from __future__ import annotations

import numpy as np


def scan_distances(codes: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Hamming distance from `center` to every row of a packed code array.

    codes: (n, words) uint64; center: (words,) uint64. Returns (n,) int32.
    """
    codes = np.ascontiguousarray(codes, dtype=np.uint64)
    center = np.ascontiguousarray(center, dtype=np.uint64)
    if codes.ndim != 2 or center.ndim != 1 or codes.shape[1] != center.shape[0]:
        raise ValueError("code word count does not match center")
    diff = np.bitwise_xor(codes, center[np.newaxis, :])
    return np.bitwise_count(diff).sum(axis=1, dtype=np.int32)
