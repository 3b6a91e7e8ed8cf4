import random

import pytest

from ascon_cube.anf.poly import CUBE_MASK, Polynomial, VarId, VarKind, cube
from ascon_cube.anf.symbolic import (
    advance_symbolic,
    evaluate_state,
    has_key_variables,
    linear_half,
    max_degree,
    sbox_half,
    symbolic_init,
)
from ascon_cube.core import CipherParams, MasterKey, NonceWords, initial_state, permutation
from ascon_cube.errors import ResourceLimitError

N_POINTS = 1000
WIDTH = (1 << N_POINTS) - 1


def packed_assignment(rng):
    """One int per variable slot holding N_POINTS random bits."""
    values = {}
    for kind in (VarKind.K0, VarKind.K1, VarKind.NONCE3, VarKind.NONCE4):
        for j in range(64):
            values[VarId(kind, j).bit] = rng.getrandbits(N_POINTS)
    return values


def point(values, kind, n):
    w = 0
    for j in range(64):
        w = (w << 1) | (values[VarId(kind, j).bit] >> n & 1)
    return w


@pytest.mark.parametrize("flavor", ["128", "128a"])
def test_two_symbolic_rounds_match_concrete_permutation(flavor):
    rng = random.Random(7)
    values = packed_assignment(rng)
    state = symbolic_init(flavor)
    snapshots = []
    for r in range(2):
        state = advance_symbolic(state, r)
        snapshots.append(evaluate_state(state, values, WIDTH))
    params = CipherParams.for_flavor(flavor)
    for n in range(N_POINTS):
        key = MasterKey(point(values, VarKind.K0, n), point(values, VarKind.K1, n))
        nonce = NonceWords(point(values, VarKind.NONCE3, n), point(values, VarKind.NONCE4, n))
        for r, snap in enumerate(snapshots):
            want = permutation(initial_state(key, nonce, params), r + 1)
            for w in range(5):
                got = 0
                for k in range(64):
                    got = (got << 1) | (snap[w][k] >> n & 1)
                assert got == want[w]


def test_iv_folded_and_key_symbolic():
    s = symbolic_init("128")
    assert s[0][0] == Polynomial.one() and s[0][1] == Polynomial.zero()
    assert s[1][5] == Polynomial.var(VarId(VarKind.K0, 5))
    assert has_key_variables(s)
    assert not has_key_variables(symbolic_init("128", key=MasterKey(1, 2)))


def test_tied_slots_share_one_variable():
    s = symbolic_init("128", ((3, 9, 9), (4, 9, 9)))
    assert s[3][9] == s[4][9] == Polynomial.var(cube(9))


def test_conflicting_slots_rejected():
    with pytest.raises(ValueError):
        symbolic_init("128", ((3, 9, 9), (3, 9, 10)))
    with pytest.raises(ValueError):
        symbolic_init("128", ((3, 9, 9),), {(3, 9): 1})
    with pytest.raises(ValueError):
        symbolic_init("128", ((2, 9, 9),))


def test_symbolic_key_depth_is_capped():
    s = symbolic_init("128", ((3, 0, 0),))
    s = advance_symbolic(advance_symbolic(s, 0), 1)
    with pytest.raises(ValueError):
        sbox_half(s, 2)


def test_concrete_key_allows_deeper_rounds():
    key = MasterKey(0x1234, 0x5678)
    s = symbolic_init("128", ((3, 0, 0), (3, 1, 1)), key=key, nonce=NonceWords(0, 0))
    for r in range(3):
        s = advance_symbolic(s, r)
    assert max_degree(s) <= 2


def test_vi_v64_is_the_only_first_round_quadratic():
    i = 10
    slots = tuple((3, j, j) for j in range(64)) + ((4, i, 64),)
    s1 = advance_symbolic(symbolic_init("128", slots), 0)
    quadratic = set()
    for word in s1:
        for p in word:
            for t in p.restrict(CUBE_MASK).terms:
                if t.bit_count() == 2:
                    quadratic.add(t)
    assert quadratic == {(1 << cube(i).bit) | (1 << cube(64).bit)}
    assert s1[2][i + 1].coefficient_of([cube(i), cube(64)]) == Polynomial.one()


def test_first_round_degree_is_two_for_any_key():
    slots = tuple((3, j, j) for j in range(64)) + ((4, 7, 64),)
    s = symbolic_init("128", slots, key=MasterKey(0xFFFF, 0xF0F0), nonce=NonceWords(0, 0))
    assert max_degree(advance_symbolic(s, 0)) == 2


def test_restricted_columns_leave_others_uncomputed():
    s = sbox_half(symbolic_init("128", ((3, 0, 0),)), 0, columns=[0, 1])
    assert s[0][5] is None and s[0][0] is not None
    full = linear_half(sbox_half(symbolic_init("128", ((3, 0, 0),)), 0))
    assert all(p is not None for w in full for p in w)


def test_monomial_limit_fails_loudly():
    s = symbolic_init("128")
    s = advance_symbolic(s, 0)
    with pytest.raises(ResourceLimitError):
        advance_symbolic(s, 1, limit=50)

