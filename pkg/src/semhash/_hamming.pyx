# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled XOR+popcount kernel for hamming-ball scans over packed codes."""

import numpy as np

from libc.stdint cimport int32_t, uint64_t

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #  define semhash_popcount64(x) __builtin_popcountll(x)
    #else
    static int semhash_popcount64(unsigned long long x) {
        x = x - ((x >> 1) & 0x5555555555555555ULL);
        x = (x & 0x3333333333333333ULL) + ((x >> 2) & 0x3333333333333333ULL);
        x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0FULL;
        return (int)((x * 0x0101010101010101ULL) >> 56);
    }
    #endif
    """
    int semhash_popcount64(uint64_t x) nogil


def scan_distances(const uint64_t[:, ::1] codes, const uint64_t[::1] center):
    """Hamming distance from `center` to every row of a packed code array.

    codes: (n, words) uint64, C-contiguous; center: (words,) uint64.
    Returns an (n,) int32 array.
    """
    if codes.shape[1] != center.shape[0]:
        raise ValueError("code word count does not match center")
    cdef Py_ssize_t n = codes.shape[0]
    cdef Py_ssize_t words = codes.shape[1]
    out_arr = np.empty(n, dtype=np.int32)
    cdef int32_t[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef int d
    with nogil:
        for i in range(n):
            d = 0
            for j in range(words):
                d += semhash_popcount64(codes[i, j] ^ center[j])
            out[i] = d
    return out_arr
