"""Symbolic Ascon state: every bit is a :class:`Polynomial`.

Used for at most two rounds with symbolic key bits; deeper rounds are only
allowed once the key has been substituted by constants.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from ascon_cube.anf.poly import (
    CUBE_MASK,
    DEFAULT_MONOMIAL_LIMIT,
    KEY_MASK,
    Polynomial,
    VarId,
    VarKind,
    cube,
)
from ascon_cube.core import (
    ROTATIONS,
    CipherParams,
    Flavor,
    MasterKey,
    NonceWords,
    get_bit,
    round_constant,
    sbox_anf,
)
from ascon_cube.errors import ResourceLimitError

Word = tuple  # 64 Polynomials, index = big-endian bit position
SymbolicState = tuple  # 5 Words

SYMBOLIC_KEY_MAX_ROUNDS = 2


@lru_cache(maxsize=None)
def _sbox_terms() -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Per output bit, the ANF monomials as tuples of input indices (0 = x0)."""
    out = []
    for poly in sbox_anf():
        monos = []
        for mono in poly.monomials():
            monos.append(tuple(sorted(v.index for v in mono)))
        out.append(tuple(monos))
    return tuple(out)


@lru_cache(maxsize=None)
def _var_row(kind: VarKind) -> tuple[Polynomial, ...]:
    n = 65 if kind == VarKind.CUBE else 64
    return tuple(Polynomial.var(VarId(kind, j)) for j in range(n))


def symbolic_init(
    flavor: Flavor | str = Flavor.ASCON128,
    cube_slots: Iterable[tuple[int, int, int]] = (),
    fixed: Mapping[tuple[int, int], int] | None = None,
    key: MasterKey | None = None,
    nonce: NonceWords | None = None,
) -> SymbolicState:
    """Initial state S0 with IV folded to constants.

    ``cube_slots`` lists ``(word, bit, var)``: nonce position ``S0[word][bit]``
    holds cube variable ``v_var``; a variable may appear in several slots.
    Other nonce bits are ``fixed`` constants, else taken from ``nonce``, else
    symbolic ``n3(j)``/``n4(j)``.  Key bits are symbolic unless ``key`` is given.
    """
    params = CipherParams.for_flavor(flavor)
    fixed = dict(fixed or {})
    slots: dict[tuple[int, int], int] = {}
    for word, bit, var in cube_slots:
        if word not in (3, 4) or not 0 <= bit < 64:
            raise ValueError(f"cube slot S0[{word}][{bit}] is not a nonce position")
        pos = (word, bit)
        if pos in slots and slots[pos] != var:
            raise ValueError(f"S0[{word}][{bit}] assigned both v{slots[pos]} and v{var}")
        if pos in fixed:
            raise ValueError(f"S0[{word}][{bit}] is both a cube slot and fixed")
        slots[pos] = var

    x0 = tuple(Polynomial.const(get_bit(params.iv, j)) for j in range(64))
    if key is None:
        x1, x2 = _var_row(VarKind.K0), _var_row(VarKind.K1)
    else:
        x1 = tuple(Polynomial.const(get_bit(key.k0, j)) for j in range(64))
        x2 = tuple(Polynomial.const(get_bit(key.k1, j)) for j in range(64))
    nonce_words = []
    for word, kind in ((3, VarKind.NONCE3), (4, VarKind.NONCE4)):
        bits = []
        for j in range(64):
            pos = (word, j)
            if pos in slots:
                bits.append(_var_row(VarKind.CUBE)[slots[pos]])
            elif pos in fixed:
                bits.append(Polynomial.const(fixed[pos]))
            elif nonce is not None:
                w = nonce.n3 if word == 3 else nonce.n4
                bits.append(Polynomial.const(get_bit(w, j)))
            else:
                bits.append(_var_row(kind)[j])
        nonce_words.append(tuple(bits))
    return (x0, x1, x2, nonce_words[0], nonce_words[1])


def has_key_variables(state: SymbolicState) -> bool:
    return any(p.support() & KEY_MASK for word in state for p in word if p is not None)


def add_constant(state: SymbolicState, round_index: int) -> SymbolicState:
    rc = round_constant(round_index)
    x2 = list(state[2])
    for j in range(56, 64):
        if (rc >> (63 - j)) & 1 and x2[j] is not None:
            x2[j] = x2[j] + 1
    return (state[0], state[1], tuple(x2), state[3], state[4])


_COLUMN_CACHE: dict = {}
_COLUMN_CACHE_MAX = 1 << 16


def _check_size(polys: Sequence[Polynomial], limit: int) -> None:
    for p in polys:
        if len(p) > limit:
            raise ResourceLimitError(f"S-box output with {len(p)} monomials exceeds limit {limit}")


def sbox_column(inputs: Sequence[Polynomial], limit: int = DEFAULT_MONOMIAL_LIMIT) -> list[Polynomial]:
    """Apply the S-box ANF to five input polynomials (x0..x4)."""
    key = tuple(inputs)
    hit = _COLUMN_CACHE.get(key)
    if hit is not None:
        _check_size(hit, limit)
        return list(hit)
    cache: dict[tuple[int, ...], Polynomial] = {(): Polynomial.one()}
    for k in range(5):
        cache[(k,)] = inputs[k]
    out = []
    for terms in _sbox_terms():
        acc: set[int] = set()
        for mono in terms:
            if mono not in cache:
                prod = cache[mono[:1]]
                for k in mono[1:]:
                    prod = prod.mul(inputs[k], limit)
                cache[mono] = prod
            acc.symmetric_difference_update(cache[mono].terms)
        out.append(Polynomial(frozenset(acc)))
    _check_size(out, limit)
    if len(_COLUMN_CACHE) >= _COLUMN_CACHE_MAX:
        _COLUMN_CACHE.clear()
    _COLUMN_CACHE[key] = tuple(out)
    return out


def sbox_half(
    state: SymbolicState,
    round_index: int,
    columns: Iterable[int] | None = None,
    limit: int = DEFAULT_MONOMIAL_LIMIT,
) -> SymbolicState:
    """Constant addition and S-box layer (S_r -> S_{r+0.5}).

    With ``columns`` only those S-boxes are evaluated and every other bit of
    the result is ``None``.
    """
    if round_index >= SYMBOLIC_KEY_MAX_ROUNDS and has_key_variables(state):
        raise ValueError(
            f"round {round_index} with symbolic key bits is not supported; substitute a concrete key first"
        )
    state = add_constant(state, round_index)
    cols = range(64) if columns is None else sorted({c % 64 for c in columns})
    out = [[None] * 64 for _ in range(5)]
    for c in cols:
        ys = sbox_column([state[w][c] for w in range(5)], limit)
        for w in range(5):
            out[w][c] = ys[w]
    return tuple(tuple(row) for row in out)


def linear_sources(columns: Iterable[int]) -> list[int]:
    """S-box columns the diffusion layer reads to produce ``columns`` of any word."""
    out = set()
    for c in columns:
        for r1, r2 in ROTATIONS:
            out.update((c % 64, (c - r1) % 64, (c - r2) % 64))
    return sorted(out)


def linear_half(state: SymbolicState, columns: Iterable[int] | None = None) -> SymbolicState:
    """Diffusion layer (S_{r+0.5} -> S_{r+1}).

    With ``columns`` only those output bits are produced (others ``None``); the
    inputs they read must be present.
    """
    cols = range(64) if columns is None else sorted({c % 64 for c in columns})
    out = []
    for w, (r1, r2) in enumerate(ROTATIONS):
        src = state[w]
        row = [None] * 64
        for j in cols:
            a, b, c = src[j], src[(j - r1) % 64], src[(j - r2) % 64]
            if a is None or b is None or c is None:
                raise ValueError("linear layer input missing; evaluate the source S-box columns first")
            row[j] = a + b + c
        out.append(tuple(row))
    return tuple(out)


def advance_symbolic(state: SymbolicState, round_index: int, limit: int = DEFAULT_MONOMIAL_LIMIT) -> SymbolicState:
    """One full round with the constant of ``round_index``."""
    return linear_half(sbox_half(state, round_index, limit=limit))


def max_degree(state: SymbolicState, mask: int = CUBE_MASK) -> int:
    return max(p.degree(mask) for word in state for p in word if p is not None)


def evaluate_state(state: SymbolicState, assignment: Mapping[int, int], width_mask: int = 1) -> list[list[int]]:
    """Evaluate every bit; see :meth:`Polynomial.evaluate` for bitsliced use."""
    return [[p.evaluate(assignment, width_mask) for p in word] for word in state]


def assignment_for(
    key: MasterKey, nonce: NonceWords, cube_values: Mapping[int, int] | None = None
) -> dict[int, int]:
    """Variable-slot values for a concrete key, nonce and cube assignment."""
    values: dict[int, int] = {}
    for j in range(64):
        values[VarId(VarKind.K0, j).bit] = get_bit(key.k0, j)
        values[VarId(VarKind.K1, j).bit] = get_bit(key.k1, j)
        values[VarId(VarKind.NONCE3, j).bit] = get_bit(nonce.n3, j)
        values[VarId(VarKind.NONCE4, j).bit] = get_bit(nonce.n4, j)
    for var, val in (cube_values or {}).items():
        values[cube(var).bit] = val
    return values
