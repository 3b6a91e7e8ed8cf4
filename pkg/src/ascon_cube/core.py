"""Bit-exact Ascon state, round function and reduced-round initialization.

Bit positions follow the big-endian convention used throughout the
package: bit 0 of a word is its most significant bit, bit 63 the least
significant one.  Position arithmetic is always taken mod 64.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

WORD_MASK = (1 << 64) - 1

SBOX = (
    4, 11, 31, 20, 26, 21, 9, 2, 27, 5, 8, 18, 29, 3, 6, 28,
    30, 19, 7, 14, 0, 13, 17, 24, 16, 12, 1, 25, 22, 10, 15, 23,
)

# (r1, r2) rotation amounts of the diffusion layer, per word
ROTATIONS = ((19, 28), (61, 39), (1, 6), (10, 17), (7, 41))

PA_ROUNDS = 12


class Flavor(enum.Enum):
    ASCON128 = "128"
    ASCON128A = "128a"

    @classmethod
    def parse(cls, text: str | "Flavor") -> "Flavor":
        if isinstance(text, Flavor):
            return text
        key = str(text).lower().replace("ascon-", "").replace("ascon", "")
        for flavor in cls:
            if flavor.value == key:
                return flavor
        raise ValueError(f"unknown flavor {text!r} (expected 128 or 128a)")


def mask(k: int) -> int:
    """Machine mask of big-endian bit position ``k`` (taken mod 64)."""
    return 1 << (63 - (k % 64))


def get_bit(word: int, k: int) -> int:
    return (word >> (63 - (k % 64))) & 1


def one_bits(word: int) -> list[int]:
    """Big-endian positions of the set bits of ``word``, ascending."""
    return [k for k in range(64) if get_bit(word, k)]


def word_from_bits(bits: Sequence[int]) -> int:
    w = 0
    for k in bits:
        w |= mask(k)
    return w


def word_hex(word: int) -> str:
    return f"{word & WORD_MASK:016x}"


def rotr(w: int, n: int) -> int:
    n %= 64
    return ((w >> n) | (w << (64 - n))) & WORD_MASK


@dataclass(frozen=True)
class CipherParams:
    flavor: Flavor
    iv: int
    pa_rounds: int
    rate_words: int

    @classmethod
    def for_flavor(cls, flavor: Flavor | str) -> "CipherParams":
        flavor = Flavor.parse(flavor)
        if flavor is Flavor.ASCON128:
            return cls(flavor, 0x80400C0600000000, PA_ROUNDS, 1)
        return cls(flavor, 0x80800C0800000000, PA_ROUNDS, 2)

    def __post_init__(self):
        expected = {
            Flavor.ASCON128: (0x80400C0600000000, 12, 1),
            Flavor.ASCON128A: (0x80800C0800000000, 12, 2),
        }[self.flavor]
        if (self.iv, self.pa_rounds, self.rate_words) != expected:
            raise ValueError(f"inconsistent parameters for Ascon-{self.flavor.value}")

    @property
    def iv_one_bits(self) -> list[int]:
        return one_bits(self.iv)


ASCON128 = CipherParams.for_flavor(Flavor.ASCON128)
ASCON128A = CipherParams.for_flavor(Flavor.ASCON128A)


@dataclass(frozen=True)
class MasterKey:
    k0: int
    k1: int

    def __post_init__(self):
        for w in (self.k0, self.k1):
            if not 0 <= w <= WORD_MASK:
                raise ValueError("key words must be 64-bit unsigned")

    @classmethod
    def from_hex(cls, text: str) -> "MasterKey":
        text = text.strip().lower().removeprefix("0x")
        if len(text) != 32:
            raise ValueError("key must be exactly 32 hex characters (k0 || k1)")
        value = int(text, 16)
        return cls(value >> 64, value & WORD_MASK)

    @classmethod
    def random(cls, rng) -> "MasterKey":
        """Draw a key from a ``numpy.random.Generator``."""
        k0, k1 = (int(x) for x in rng.integers(0, 1 << 64, size=2, dtype="uint64"))
        return cls(k0, k1)

    def hex(self) -> str:
        return word_hex(self.k0) + word_hex(self.k1)

    def xor_word(self) -> int:
        return self.k0 ^ self.k1


@dataclass(frozen=True)
class NonceWords:
    n3: int = 0
    n4: int = 0

    def __post_init__(self):
        for w in (self.n3, self.n4):
            if not 0 <= w <= WORD_MASK:
                raise ValueError("nonce words must be 64-bit unsigned")


@dataclass(frozen=True)
class AsconState:
    words: tuple[int, int, int, int, int]

    def __post_init__(self):
        if len(self.words) != 5:
            raise ValueError("an Ascon state has exactly 5 words")
        if any(not 0 <= w <= WORD_MASK for w in self.words):
            raise ValueError("state words must be 64-bit unsigned")
        object.__setattr__(self, "words", tuple(int(w) for w in self.words))

    @classmethod
    def of(cls, *words: int) -> "AsconState":
        return cls(tuple(words))

    def __getitem__(self, j: int) -> int:
        return self.words[j]

    def bit(self, word: int, k: int) -> int:
        return get_bit(self.words[word], k)

    def column(self, k: int) -> int:
        """5-bit S-box input at position ``k``; word 0 is the MSB."""
        return sum(self.bit(j, k) << (4 - j) for j in range(5))

    def xor(self, other: "AsconState") -> "AsconState":
        return AsconState(tuple(a ^ b for a, b in zip(self.words, other.words)))

    def hex(self) -> list[str]:
        return [word_hex(w) for w in self.words]


def sbox(x: int) -> int:
    if not 0 <= x <= 31:
        raise ValueError(f"S-box input out of range: {x}")
    return SBOX[x]


def sbox_anf():
    """ANF of the five S-box output bits over inputs x0..x4 (x0 = MSB).

    Computed from the lookup table by the binary Moebius transform and
    returned as :class:`~ascon_cube.anf.poly.Polynomial` objects whose
    variables are the cube variables ``v0..v4`` standing for ``x0..x4``.
    """
    from ascon_cube.anf.poly import Polynomial, VarId, VarKind

    out = []
    for j in range(5):
        coeffs = [(SBOX[x] >> (4 - j)) & 1 for x in range(32)]
        for i in range(5):
            for x in range(32):
                if x & (1 << i):
                    coeffs[x] ^= coeffs[x ^ (1 << i)]
        monomials = []
        for x in range(32):
            if coeffs[x]:
                vars_ = [VarId(VarKind.CUBE, 4 - b) for b in range(5) if x & (1 << b)]
                monomials.append(vars_)
        out.append(Polynomial.from_monomials(monomials))
    return out


def linear_layer(word_index: int, w: int) -> int:
    if word_index not in range(5):
        raise ValueError(f"word index must be 0..4, got {word_index}")
    r1, r2 = ROTATIONS[word_index]
    return w ^ rotr(w, r1) ^ rotr(w, r2)


def round_constant(round_index: int, pa_rounds: int = PA_ROUNDS) -> int:
    if pa_rounds != PA_ROUNDS:
        raise ValueError("only the 12-round p^a schedule is supported")
    if not 0 <= round_index < pa_rounds:
        raise ValueError(f"round index must be in 0..{pa_rounds - 1}")
    return ((0xF - round_index) << 4) | round_index


def sbox_layer(words: Sequence[int]) -> tuple[int, ...]:
    """Apply the 64 S-boxes column-wise, in bitsliced form."""
    x0, x1, x2, x3, x4 = words
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
    return tuple(w & WORD_MASK for w in (x0, x1, x2, x3, x4))


def ascon_round(
    state: AsconState,
    rc: int,
    substitution: Callable[[Sequence[int]], Sequence[int]] = sbox_layer,
) -> AsconState:
    """One round: constant addition to x2, S-box layer, diffusion layer."""
    words = list(state.words)
    words[2] ^= rc & 0xFF
    words = substitution(words)
    return AsconState(tuple(linear_layer(j, w) for j, w in enumerate(words)))


def permutation(state: AsconState, rounds: int, first_round: int = 0) -> AsconState:
    for r in range(first_round, first_round + rounds):
        state = ascon_round(state, round_constant(r))
    return state


def initial_state(key: MasterKey, nonce: NonceWords, params: CipherParams = ASCON128) -> AsconState:
    return AsconState((params.iv, key.k0, key.k1, nonce.n3, nonce.n4))


def init_oracle(
    key: MasterKey,
    nonce: NonceWords,
    r: int,
    params: CipherParams = ASCON128,
) -> tuple[int, ...]:
    """Rate words after ``r`` initialization rounds.

    This is the keystream an attacker sees as P1 xor C1 when there is no
    associated data.  The trailing key addition only touches x3 and x4
    and is therefore irrelevant here.
    """
    if not 1 <= r <= params.pa_rounds:
        raise ValueError(f"round count must be in 1..{params.pa_rounds}, got {r}")
    state = permutation(initial_state(key, nonce, params), r)
    return state.words[: params.rate_words]
