"""Compiled inner loops for cube summation and batched initialization.

Words are machine ``uint64`` values; these kernels never see big-endian
bit positions.  The callers in :mod:`ascon_cube.cube` translate.
"""

from __future__ import annotations

import numba as nb
import numpy as np
from numba import uint64

LANE_BITS = 6
LANES = 1 << LANE_BITS


@nb.njit(inline="always")
def _rotr(x, n):
    return (x >> uint64(n)) | (x << uint64(64 - n))


@nb.njit(inline="always")
def _round(x0, x1, x2, x3, x4, c):
    x2 ^= c
    x0 ^= x4
    x4 ^= x3
    x2 ^= x1
    t0 = ~x0 & x1
    t1 = ~x1 & x2
    t2 = ~x2 & x3
    t3 = ~x3 & x4
    t4 = ~x4 & x0
    x0 ^= t1
    x1 ^= t2
    x2 ^= t3
    x3 ^= t4
    x4 ^= t0
    x1 ^= x0
    x0 ^= x4
    x3 ^= x2
    x2 = ~x2
    x0 ^= _rotr(x0, 19) ^ _rotr(x0, 28)
    x1 ^= _rotr(x1, 61) ^ _rotr(x1, 39)
    x2 ^= _rotr(x2, 1) ^ _rotr(x2, 6)
    x3 ^= _rotr(x3, 10) ^ _rotr(x3, 17)
    x4 ^= _rotr(x4, 7) ^ _rotr(x4, 41)
    return x0, x1, x2, x3, x4


@nb.njit(inline="always")
def _last_round_rate(x0, x1, x2, x3, x4, c):
    # S-box outputs y0, y1 only; the diffusion layer is applied once to the sum
    x2 ^= c
    a0 = x0 ^ x4
    a2 = x2 ^ x1
    a4 = x4 ^ x3
    b0 = a0 ^ (~x1 & a2)
    b1 = x1 ^ (~a2 & x3)
    b4 = a4 ^ (~a0 & x1)
    return b0 ^ b4, b1 ^ b0


@nb.njit(cache=True)
def sigma0(w):
    return w ^ _rotr(w, 19) ^ _rotr(w, 28)


@nb.njit(cache=True)
def sigma1(w):
    return w ^ _rotr(w, 61) ^ _rotr(w, 39)


@nb.njit(cache=True, nogil=True)
def _start_words(start, deltas, first_var, count, gray):
    s = start.copy()
    for j in range(count):
        if (gray >> j) & 1:
            for w in range(5):
                s[w] ^= deltas[first_var + j, w]
    return s


@nb.njit(cache=True, nogil=True)
def _ctz(c):
    j = 0
    while (c & 1) == 0:
        c >>= 1
        j += 1
    return j


@nb.njit(cache=True, nogil=True)
def cube_sum_scalar(start, deltas, rcs, lo, hi):
    """Unsigned XOR of pre-diffusion (y0, y1) over Gray-coded assignments lo..hi-1.

    ``rcs`` holds the constants of every round still to apply; the last one
    is the partial round.  ``deltas[j]`` is the state difference caused by
    switching cube variable j on.
    """
    d = deltas.shape[0]
    nr = rcs.shape[0]
    s = _start_words(start, deltas, 0, d, lo ^ (lo >> 1))
    acc0 = uint64(0)
    acc1 = uint64(0)
    for c in range(lo, hi):
        if c != lo:
            j = _ctz(c)
            for w in range(5):
                s[w] ^= deltas[j, w]
        x0, x1, x2, x3, x4 = s[0], s[1], s[2], s[3], s[4]
        for r in range(nr - 1):
            x0, x1, x2, x3, x4 = _round(x0, x1, x2, x3, x4, rcs[r])
        y0, y1 = _last_round_rate(x0, x1, x2, x3, x4, rcs[nr - 1])
        acc0 ^= y0
        acc1 ^= y1
    return acc0, acc1


@nb.njit(cache=True, nogil=True)
def cube_sum_lanes(start, deltas, rcs, lo, hi):
    """As :func:`cube_sum_scalar`, with the first 6 variables spread over 64 lanes.

    The outer Gray counter ranges over the remaining ``d - 6`` variables.
    """
    d = deltas.shape[0]
    nr = rcs.shape[0]
    o = np.zeros((5, LANES), np.uint64)
    for lane in range(LANES):
        for j in range(LANE_BITS):
            if (lane >> j) & 1:
                for w in range(5):
                    o[w, lane] ^= deltas[j, w]
    s = _start_words(start, deltas, LANE_BITS, d - LANE_BITS, lo ^ (lo >> 1))
    a0 = np.empty(LANES, np.uint64)
    a1 = np.empty(LANES, np.uint64)
    a2 = np.empty(LANES, np.uint64)
    a3 = np.empty(LANES, np.uint64)
    a4 = np.empty(LANES, np.uint64)
    acc0 = np.zeros(LANES, np.uint64)
    acc1 = np.zeros(LANES, np.uint64)
    for c in range(lo, hi):
        if c != lo:
            j = _ctz(c) + LANE_BITS
            for w in range(5):
                s[w] ^= deltas[j, w]
        for lane in range(LANES):
            a0[lane] = s[0] ^ o[0, lane]
            a1[lane] = s[1] ^ o[1, lane]
            a2[lane] = s[2] ^ o[2, lane]
            a3[lane] = s[3] ^ o[3, lane]
            a4[lane] = s[4] ^ o[4, lane]
        for r in range(nr - 1):
            rc = rcs[r]
            for lane in range(LANES):
                x0, x1, x2, x3, x4 = _round(a0[lane], a1[lane], a2[lane], a3[lane], a4[lane], rc)
                a0[lane] = x0
                a1[lane] = x1
                a2[lane] = x2
                a3[lane] = x3
                a4[lane] = x4
        rc = rcs[nr - 1]
        for lane in range(LANES):
            y0, y1 = _last_round_rate(a0[lane], a1[lane], a2[lane], a3[lane], a4[lane], rc)
            acc0[lane] ^= y0
            acc1[lane] ^= y1
    r0 = uint64(0)
    r1 = uint64(0)
    for lane in range(LANES):
        r0 ^= acc0[lane]
        r1 ^= acc1[lane]
    return r0, r1


@nb.njit(cache=True, nogil=True)
def batch_rate(iv, k0s, k1s, n3, n4, rcs):
    """Rate words (x0, x1) after ``len(rcs)`` rounds for many keys, one nonce."""
    n = k0s.shape[0]
    out = np.empty((n, 2), np.uint64)
    for i in range(n):
        x0, x1, x2, x3, x4 = iv, k0s[i], k1s[i], n3, n4
        for r in range(rcs.shape[0]):
            x0, x1, x2, x3, x4 = _round(x0, x1, x2, x3, x4, rcs[r])
        out[i, 0] = x0
        out[i, 1] = x1
    return out
