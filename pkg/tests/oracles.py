"""Independent reference computations used as test oracles.

Nothing here imports the package's round function or kernels.  The
permutation is evaluated one bit column at a time through the S-box
lookup table, with the diffusion layer written out per output bit.
"""

from __future__ import annotations

import itertools

SBOX_TABLE = [4, 11, 31, 20, 26, 21, 9, 2, 27, 5, 8, 18, 29, 3, 6, 28,
              30, 19, 7, 14, 0, 13, 17, 24, 16, 12, 1, 25, 22, 10, 15, 23]
ROT = [(19, 28), (61, 39), (1, 6), (10, 17), (7, 41)]
IVS = {"128": 0x80400C0600000000, "128a": 0x80800C0800000000}


def bits_of(word):
    """Big-endian bit list: element k is the k-th most significant bit."""
    return [(word >> (63 - k)) & 1 for k in range(64)]


def word_of(bits):
    w = 0
    for b in bits:
        w = (w << 1) | b
    return w


def scalar_round(state_bits, rc):
    """state_bits: 5 lists of 64 big-endian bits.  Returns the next state."""
    x = [list(row) for row in state_bits]
    for k in range(8):
        x[2][56 + k] ^= (rc >> (7 - k)) & 1
    y = [[0] * 64 for _ in range(5)]
    for k in range(64):
        col = sum(x[j][k] << (4 - j) for j in range(5))
        out = SBOX_TABLE[col]
        for j in range(5):
            y[j][k] = (out >> (4 - j)) & 1
    z = [[0] * 64 for _ in range(5)]
    for j in range(5):
        r1, r2 = ROT[j]
        for k in range(64):
            z[j][k] = y[j][k] ^ y[j][(k - r1) % 64] ^ y[j][(k - r2) % 64]
    return z


def scalar_constant(r):
    return (0xF0 - 0x10 * r) + r


def scalar_init(k0, k1, n3, n4, rounds, flavor="128"):
    state = [bits_of(w) for w in (IVS[flavor], k0, k1, n3, n4)]
    for r in range(rounds):
        state = scalar_round(state, scalar_constant(r))
    words = [word_of(row) for row in state]
    return tuple(words[:1] if flavor == "128" else words[:2])


def brute_cube_sum(k0, k1, var_positions, n3, n4, rounds, flavor="128"):
    """XOR of scalar_init over all assignments; var_positions[v] = [(word, bit)]."""
    acc = None
    for assignment in itertools.product((0, 1), repeat=len(var_positions)):
        w = {3: n3, 4: n4}
        for val, positions in zip(assignment, var_positions):
            for word, bit in positions:
                m = 1 << (63 - bit)
                w[word] = (w[word] & ~m) | (m if val else 0)
        out = scalar_init(k0, k1, w[3], w[4], rounds, flavor)
        acc = out if acc is None else tuple(a ^ b for a, b in zip(acc, out))
    return acc


def count_no_adjacent_zeros(n):
    """Brute-force count of length-n bit strings with no two adjacent zeros."""
    if n <= 0:
        return 1
    total = 0
    full = (1 << n) - 1
    for s in range(1 << n):
        zeros = ~s & full
        if zeros & (zeros >> 1) == 0:
            total += 1
    return total


def count_no_adjacent_zeros_vectorized(n, chunk_log2=22):
    """Same count as count_no_adjacent_zeros, vectorized in chunks for n up to about 30."""
    import numpy as np

    full = np.uint32((1 << n) - 1)
    total = 0
    step = 1 << min(n, chunk_log2)
    for lo in range(0, 1 << n, step):
        s = np.arange(lo, lo + step, dtype=np.uint32)
        zeros = ~s & full
        total += int(np.count_nonzero((zeros & (zeros >> np.uint32(1))) == 0))
    return total


def scalar_permutation(words, rounds, first=0):
    state = [bits_of(w) for w in words]
    for r in range(first, first + rounds):
        state = scalar_round(state, scalar_constant(r))
    return [word_of(row) for row in state]


def ascon128_tag_empty_message(k0, k1, n0, n1):
    """Tag of Ascon-128 v1.2 for empty associated data and empty plaintext."""
    x = scalar_permutation([IVS["128"], k0, k1, n0, n1], 12)
    x[3] ^= k0
    x[4] ^= k1
    x[4] ^= 1  # domain separation
    x[0] ^= 0x80 << 56  # padding of the empty plaintext block
    x[1] ^= k0
    x[2] ^= k1
    x = scalar_permutation(x, 12)
    return x[3] ^ k0, x[4] ^ k1


def count_b_vectors_outside(subsets, width=64, window=6):
    """Number of b-vectors in none of ``subsets``.

    Each subset is a dict {position: value}; a vector is inside when it
    agrees on every listed position.  Positions of one subset must fit in a
    cyclic window of ``window`` consecutive indexes.  Transfer-matrix count
    whose state is the first and the most recent ``window`` bits.
    """
    linear, wrapped = [], []
    for cond in subsets:
        pos = sorted(cond)
        if pos[-1] - pos[0] < window:
            linear.append((pos[-1], cond))
        else:
            wrapped.append(cond)
            if not any((pos[(k + 1) % len(pos)] - pos[k]) % width >= width - window + 1 for k in range(len(pos))):
                raise ValueError(f"subset {cond} does not fit the window")
    by_end = {}
    for end, cond in linear:
        by_end.setdefault(end, []).append(cond)

    states = {((), ()): 1}
    for p in range(width):
        nxt = {}
        for (head, tail), count in states.items():
            for bit in (0, 1):
                new_tail = (tail + (bit,))[-window:]
                recent = {p - len(new_tail) + 1 + k: v for k, v in enumerate(new_tail)}
                if any(all(recent.get(q) == v for q, v in cond.items()) for cond in by_end.get(p, [])):
                    continue
                new_head = head + (bit,) if len(head) < window else head
                key = (new_head, new_tail)
                nxt[key] = nxt.get(key, 0) + count
        states = nxt

    total = 0
    for (head, tail), count in states.items():
        known = {k: v for k, v in enumerate(head)}
        known.update({width - len(tail) + k: v for k, v in enumerate(tail)})
        if any(all(known.get(q) == v for q, v in cond.items()) for cond in wrapped):
            continue
        total += count
    return total
