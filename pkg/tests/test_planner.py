import json
import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from ascon_cube.anf import expected
from ascon_cube.anf.coefficients import derive_key_conditions, extract_cubic_coefficients
from ascon_cube.anf.verify import key_with_conditions, normalized_equation
from ascon_cube.core import Flavor, MasterKey, get_bit
from ascon_cube.cube import validate_spec
from ascon_cube.errors import ConsistencyError
from ascon_cube.planner import (
    CubeCase,
    SubsetKind,
    b_bits,
    build_plan,
    case_of,
    complexity_ledger,
    emit_cube_files,
    family_menu,
    filtration_count,
    log2_sum,
    mask_offsets,
    matches_key,
    random_key_in,
    simulate_subset_identification,
    weak_key_recovered_bits,
)

PLAN = build_plan("128")
PLAN_A = build_plan("128a")
U, UP = SubsetKind.U, SubsetKind.UPRIME


def fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


@pytest.mark.parametrize("n,count", sorted(expected.FILTRATION_COUNTS.items()) + [(1, 2)])
def test_filtration_counts_at_chain_lengths(n, count):
    assert filtration_count(n) == count


def test_filtration_matches_brute_force_up_to_25():
    for n in range(1, 26):
        brute = oracles.count_no_adjacent_zeros(n) if n <= 14 else oracles.count_no_adjacent_zeros_vectorized(n)
        assert filtration_count(n) == brute, n


@given(st.integers(1, 40))
def test_filtration_is_fibonacci(n):
    assert filtration_count(n) == fib(n + 2)


def test_subset_counts_128():
    assert len(PLAN.of_kind(U)) == 52
    assert len(PLAN.of_kind(UP)) == 11
    one_bit = {s.conditions[0].positions[0] for s in PLAN.of_kind(UP)}
    assert one_bit == set(expected.ONE_BIT_VIA_I1) | set(expected.ONE_BIT_VIA_I6)
    # printed with S0[2]=k1; at 56..59 the round constant flips the true-key value
    assert all(normalized_equation(s.conditions[0]).rhs == 0 for s in PLAN.of_kind(UP))
    assert [e.to_text() for e in PLAN.subset(UP, 58).conditions] == ["b(59)=1"]
    assert sorted(s.i for s in PLAN.of_kind(UP)) == sorted(expected.PRIMED_POSITIONS)


def test_u_indexes_128():
    # i=24 duplicates the b(25) subset of i=19; i=30 is an ordinary two-condition subset
    excluded = set(expected.PRIMED_POSITIONS) | {24}
    assert {s.i for s in PLAN.of_kind(U)} == set(range(64)) - excluded
    assert [i for i, _ in PLAN.dropped] == [24]
    assert PLAN.subset(U, 30).conditions[0].positions == (31,)


def test_subset_shape_invariants():
    for plan in (PLAN, PLAN_A):
        for s in plan.subsets:
            if s.kind is U:
                assert len(s.conditions) == 2 and s.tests == 64 and s.test_cost_log2 == 71
            else:
                assert len(s.conditions) == 1 and s.tests == 128 and s.test_cost_log2 == 72


def test_chains_128_match_printed():
    assert PLAN.ki_chains[0] == expected.CHAINS_128[0]
    assert set(PLAN.ki_chains[1:]) == set(expected.CHAINS_128[1:])
    assert sorted(len(c) for c in PLAN.ki_chains[1:]) == [4, 8, 33]


def test_chains_are_disjoint():
    for plan in (PLAN, PLAN_A):
        flat = [p for c in plan.ki_chains for p in c]
        assert len(flat) == len(set(flat))


def test_chains_128a_derived():
    assert PLAN_A.ki_chains[0] == (5, 13, 25, 26, 33, 59, 3, 15, 16, 23)
    assert [len(c) for c in PLAN_A.ki_chains[1:]] == [10, 20, 17]
    assert (len(PLAN_A.of_kind(U)), len(PLAN_A.of_kind(UP))) == (54, 10)


def test_chains_128a_as_printed():
    # strict comparison with the published arrays; see the decisions ledger
    derived = (PLAN_A.ki_chains[0], [len(c) for c in PLAN_A.ki_chains[1:]])
    printed = (expected.CHAINS_128A[0], [len(c) for c in expected.CHAINS_128A[1:]])
    assert derived == printed


def test_ledger_128_derived_values():
    r = complexity_ledger("128").rounded()
    assert r["cube_testing"] == 77.21
    assert r["remaining"] == 103.92
    assert r["worst_case"] == 103.92
    assert r["filter"] == 33.0


def test_ledger_identities():
    for flavor in ("128", "128a"):
        led = complexity_ledger(flavor)
        assert led.total_log2 == pytest.approx(log2_sum(led.terms.values()))
        assert led.total_log2 - led.remaining_log2 < 0.01
    led = complexity_ledger("128")
    assert led.weak_key_log2 == pytest.approx(math.log2(2**76 + 11 * 2**72))
    assert led.cube_testing_log2 == pytest.approx(math.log2(11 * 2**72 + 52 * 2**71))


def test_remaining_size_matches_independent_count():
    for plan in (PLAN, PLAN_A):
        subsets = [{c.positions[0]: c.rhs for c in s.conditions} for s in plan.subsets]
        n = oracles.count_b_vectors_outside(subsets)
        assert 64 + math.log2(n) == pytest.approx(plan.ledger.remaining_log2, abs=1e-9)


def test_reduced_model_count_against_brute_force():
    width = 16
    subsets = [{(i + 1) % width: 0, (i + 6) % width: 0} for i in range(0, width, 3)] + [{7: 0}]
    brute = 0
    for b in range(1 << width):
        bits = [(b >> (width - 1 - k)) & 1 for k in range(width)]
        if not any(all(bits[p] == v for p, v in c.items()) for c in subsets):
            brute += 1
    assert oracles.count_b_vectors_outside(subsets, width=width) == brute


def test_weak_key_bits():
    assert len(weak_key_recovered_bits(PLAN.of_kind(UP))) == 52


def test_plan_agrees_with_algebra():
    for s in PLAN.subsets[::7] + PLAN_A.subsets[::9]:
        for mask in (0, s.tests - 1, s.tests // 3):
            system = derive_key_conditions(
                extract_cubic_coefficients(s.i, s.aux, mask_offsets(s.menu, mask), s.flavor)
            )
            assert system.as_dict() == s.family[mask]


def test_cases_and_menus():
    assert case_of(8, "128") is CubeCase.TWO and case_of(0, "128") is CubeCase.ONE
    aux, menu = family_menu(8, CubeCase.TWO, "128")
    assert menu[0] == 1 and 1 not in aux
    with pytest.raises(ValueError):
        family_menu(0, CubeCase.TWO, "128")
    assert mask_offsets((3, 4, 9), 0b101) == (3, 9)


def test_materialized_cubes_valid_and_plan_only():
    for s in (PLAN.subsets[0], PLAN.subsets[-1]):
        for spec in s.cube_family()[:5]:
            check = validate_spec(spec)
            assert check.ok and check.plan_only and spec.dimension == 65 and spec.rounds == 7


def test_emit_cube_files(tmp_path):
    assert PLAN.cube_count == 52 * 64 + 11 * 128
    n = emit_cube_files(PLAN, tmp_path)
    assert n == 4736 == len(list(tmp_path.iterdir()))


def test_plan_json_is_stable():
    assert PLAN.to_json() == build_plan(Flavor.ASCON128).to_json()
    doc = json.loads(PLAN.to_json())
    assert doc["counts"] == {"U": 52, "Uprime": 11}


@pytest.mark.parametrize("kind", [U, UP])
def test_identification_recovers_mask_and_bits(kind):
    rng = random.Random(int(kind is UP))
    subsets = PLAN.of_kind(kind)
    for n in range(6):
        s = subsets[rng.randrange(len(subsets))]
        mask = rng.randrange(s.tests)
        key = random_key_in(s, rng, mask)
        ident = simulate_subset_identification(key, s, full_state=(n == 0))
        assert ident.in_subset and ident.mask == mask
        assert matches_key(ident, key)


def test_key_outside_subset_is_reported():
    s = PLAN.subset(U, 0)
    rng = random.Random(3)
    key = random_key_in(s, rng)
    b = b_bits(key) ^ (1 << (63 - s.conditions[0].positions[0]))
    outside = MasterKey(key.k0, key.k0 ^ b)
    assert not s.contains(outside)
    ident = simulate_subset_identification(outside, s)
    assert not ident.in_subset and ident.mask is None


def test_weak_key_identification_recovers_52_bits():
    rng = random.Random(52)
    conds = {s.conditions[0].positions[0]: s.conditions[0].rhs for s in PLAN.of_kind(UP)}
    key = key_with_conditions(conds, rng)
    recovered = {}
    for s in PLAN.of_kind(UP):
        ident = simulate_subset_identification(key, s)
        assert ident.in_subset
        recovered.update(ident.recovered)
    assert len(recovered) == 52
    assert all(get_bit(b_bits(key), p) == v for p, v in recovered.items())


def test_unknown_kind_lookup():
    with pytest.raises(KeyError):
        PLAN.subset(U, 24)
    assert issubclass(ConsistencyError, RuntimeError)
