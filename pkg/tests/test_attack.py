import json
from functools import lru_cache

import numpy as np
import pytest

from ascon_cube.attack import (
    AttackParams,
    InitOracle,
    RecoveredKeyInfo,
    attack_cost,
    constant_flipped_positions,
    exhaustive_completion,
    recover_bits,
    run_attack,
)
from ascon_cube.core import ASCON128, CipherParams, MasterKey, get_bit, mask
from ascon_cube.cube import cube_sum
from ascon_cube.errors import NoCandidateError, ResourceLimitError

P5 = AttackParams.load(5)
IV_ONES = set(ASCON128.iv_one_bits)


def with_bit(key, target, t, value):
    """Copy of ``key`` with k0(t) or k0(t)+k1(t) forced to ``value``."""
    m = mask(t)
    if target == "k0":
        return MasterKey((key.k0 & ~m) | (m if value else 0), key.k1)
    return MasterKey(key.k0, (key.k1 & ~m) | (m if get_bit(key.k0, t) ^ value else 0))


def zeroing_value(set_id, t):
    s = P5.sets[set_id]
    means = s.nonzero_means
    if s.target == "xor" and t in constant_flipped_positions():
        means ^= 1
    return 1 - means


def test_tables_have_expected_shape():
    assert sorted(P5.sets) == ["1", "2", "3", "4", "5"]
    assert all(len(s.vars) == 16 for s in P5.sets.values())
    p6 = AttackParams.load(6)
    assert all(len(s.vars) == 32 for s in p6.sets.values())
    assert constant_flipped_positions() == [56, 57, 58, 59]
    with pytest.raises(ValueError):
        AttackParams.load(7)


def test_attack_cost():
    assert attack_cost(P5) == 1 << 24
    assert attack_cost(AttackParams.load(6)) == 1 << 40
    assert attack_cost(AttackParams.load(6), 4) == 4 * 2 * 2 * (1 << 32)


@pytest.mark.parametrize("set_id", ["1", "2", "3", "4", "5"])
def test_condition_forces_zero_sum(set_id):
    rng = np.random.default_rng(int(set_id))
    target = P5.sets[set_id].target
    ts = [t for t in range(64) if (set_id != "4" or t in IV_ONES) and (set_id != "5" or t not in IV_ONES)]
    for t in ts:
        for _ in range(2):
            key = with_bit(MasterKey.random(rng), target, t, zeroing_value(set_id, t))
            assert cube_sum(P5.spec(set_id, t), key).is_zero, (set_id, t)


@lru_cache(maxsize=1)
def _hundred_key_runs():
    rng = np.random.default_rng(100)
    runs = []
    for n in range(100):
        key = MasterKey.random(rng)
        runs.append((key, recover_bits(InitOracle(key, 5, ASCON128), P5, free_seed=n)))
    return runs


def test_flagged_bits_never_wrong_over_100_keys():
    for key, info in _hundred_key_runs():
        assert info.errors_against(key) == []


def test_remain_below_14_on_every_one_of_100_keys():
    # strict by design: key 93 of this stream leaves 15 bits open
    over = [(key.hex(), info.remain) for key, info in _hundred_key_runs() if info.remain >= 14]
    assert over == []


def test_nonzero_sum_flags_k0():
    key = with_bit(MasterKey(0x0123456789ABCDEF, 0x1111111111111111), "k0", 5, 1)
    oracle = InitOracle(key, 5, ASCON128)
    info = recover_bits(oracle, P5, ts=[5])
    assert info.steps[0].sums["1"] != ["0000000000000000"]
    assert list(info.steps[0].sums)[0] == "1"
    assert info.k0_bits[5] == 1


def test_constant_inversion_at_57():
    rng = np.random.default_rng(57)
    seen = 0
    for _ in range(40):
        key = with_bit(MasterKey.random(rng), "xor", 57, 0)
        info = recover_bits(InitOracle(key, 5, ASCON128), P5, ts=[57], free_seed=int(rng.integers(1 << 30)))
        if info.steps[0].sums.get("3", ["0"]) != ["0000000000000000"]:
            seen += 1
            assert info.xor_bits[57] == 0
    assert seen > 0


def test_flags_and_remain_agree():
    info = RecoveredKeyInfo()
    info.k0_bits[3] = 1
    info.xor_bits[9] = 0
    assert info.remain == 126
    assert sum(map(sum, info.flags)) == 2


def test_recovery_is_deterministic():
    key = MasterKey.random(np.random.default_rng(8))
    a = recover_bits(InitOracle(key, 5, ASCON128), P5, ts=range(8), free_seed=3)
    b = recover_bits(InitOracle(key, 5, ASCON128), P5, ts=range(8), free_seed=3)
    assert a.to_dict() == b.to_dict()


def info_for(key, unknown):
    info = RecoveredKeyInfo()
    b = key.xor_word()
    info.k0_bits = [get_bit(key.k0, t) for t in range(64)]
    info.xor_bits = [get_bit(b, t) for t in range(64)]
    for row, t in unknown:
        (info.k0_bits if row == "k0" else info.xor_bits)[t] = None
    return info


def test_completion_with_nothing_unknown():
    key = MasterKey(0xDEADBEEF, 0xCAFEBABE)
    done = exhaustive_completion(info_for(key, []), InitOracle(key, 5, ASCON128))
    assert done.key == key and done.candidates_tested == 1


def test_completion_with_fourteen_unknown():
    key = MasterKey.random(np.random.default_rng(14))
    unknown = [("k0", t) for t in range(0, 56, 8)] + [("xor", t) for t in range(3, 59, 8)]
    assert len(unknown) == 14
    done = exhaustive_completion(info_for(key, unknown), InitOracle(key, 5, ASCON128), seed=1)
    assert done.key == key and done.candidates_tested <= 1 << 14


def test_completion_rejects_corrupted_info():
    key = MasterKey(0x1234, 0x5678)
    info = info_for(key, [("k0", 1)])
    info.xor_bits[40] ^= 1
    with pytest.raises(NoCandidateError):
        exhaustive_completion(info, InitOracle(key, 5, ASCON128))


def test_completion_respects_budget():
    key = MasterKey(1, 2)
    with pytest.raises(ResourceLimitError):
        exhaustive_completion(info_for(key, [("k0", t) for t in range(12)]), InitOracle(key, 5, ASCON128),
                              budget_log2=10)


def test_oracle_counts_queries_and_checks_rounds():
    key = MasterKey(3, 4)
    oracle = InitOracle(key, 5, ASCON128)
    oracle.cube_sum(P5.spec("1", 0))
    assert oracle.queries == 1 << 16
    with pytest.raises(ValueError):
        oracle.cube_sum(AttackParams.load(6).spec("1", 0))
    with pytest.raises(ValueError):
        InitOracle(key, 5, CipherParams.for_flavor("128a")).cube_sum(P5.spec("1", 0))


def test_full_five_round_attack_report():
    key = MasterKey.random(np.random.default_rng(1))
    report = run_attack(key, 5, seed=4)
    assert report.success and report.recovered_key == key.hex()
    assert report.oracle_calls <= 1 << 24
    again = run_attack(key, 5, seed=4)
    assert json.dumps(report.to_dict()) == json.dumps(again.to_dict())
    assert "result: MATCH" in report.text()
