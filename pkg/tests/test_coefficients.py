import random

import pytest

from ascon_cube.anf import expected
from ascon_cube.anf.coefficients import (
    AUX_OFFSETS,
    AffineEquation,
    derive_key_conditions,
    degree_columns,
    equation_from_coefficient,
    extract_cubic_coefficients,
    iv_bit,
    max_cube_degree,
    normalize_round_constant,
)
from ascon_cube.anf.poly import parse
from ascon_cube.anf.verify import (
    check_one_bit_families,
    compare_state_templates,
    key_with_conditions,
    normalized_equation,
    offset_system,
    relevant_iv_zero,
)
from ascon_cube.core import Flavor, MasterKey

F128 = Flavor.ASCON128
CLEAN = [i for i in range(64) if relevant_iv_zero(i, F128) and not {(i + a) % 64 for a in (1, 4, 26, 3, 25, 9, 31)} & {56, 57, 58, 59}]


def norm(polys):
    return [normalize_round_constant(p) for p in polys]


def test_clean_positions_exist():
    assert len(CLEAN) >= 10


@pytest.mark.parametrize("i", CLEAN[:6])
def test_no_aux_partner_four(i):
    table = extract_cubic_coefficients(i)
    assert norm(table.coefficients_at(1, 4)) == [parse("k0(i+4)+k1(i+4)+1", i=i)]


@pytest.mark.parametrize("i", CLEAN[:6])
def test_aux_zeroes_partner_48(i):
    table = extract_cubic_coefficients(i, expected.AUX_SLOTS)
    assert table.coefficients_at(1, 48) == []
    assert extract_cubic_coefficients(i).coefficients_at(1, 48) == [parse("1")]


@pytest.mark.parametrize("i", CLEAN[:6])
def test_control_four_flips_constant(i):
    table = extract_cubic_coefficients(i, AUX_OFFSETS, (4,))
    assert norm(table.coefficients_at(1, 4)) == [parse("k0(i+4)+k1(i+4)", i=i)]


@pytest.mark.parametrize("i", CLEAN)
def test_base_and_control_systems(i):
    base = derive_key_conditions(extract_cubic_coefficients(i, AUX_OFFSETS))
    assert offset_system(base, i) == dict(expected.BASE_SYSTEM)
    ctrl = derive_key_conditions(extract_cubic_coefficients(i, AUX_OFFSETS, (4,)))
    assert offset_system(ctrl, i) == dict(expected.CONTROL4_SYSTEM)


def test_case2_via_i1_shape():
    i = 8  # IV(9) = 1 for Ascon-128
    assert iv_bit(F128, i + 1) == 1
    aux = tuple(a for a in AUX_OFFSETS if a != 1)
    for control in [(), (1,), (1, 3, 31), (4, 9)]:
        system = offset_system(derive_key_conditions(extract_cubic_coefficients(i, aux, control)), i)
        assert set(system) == {1, 4, 26, 3, 25, 6, 9, 31}
        assert system[6] == 0
        for off in expected.CASE2_VIA_I1_FREE:
            assert system[off] == (0 if off in control else 1)


def test_one_bit_families_for_128():
    checks = check_one_bit_families(F128)
    assert [c.passed for c in checks] == [True, True], [c.detail for c in checks]


@pytest.mark.parametrize("i", [0, 13, 40, 63])
def test_state_templates(i):
    checks = compare_state_templates(i, F128)
    real = [c for c in checks if not c.open_question]
    assert real and all(c.passed for c in real), [c.line() for c in real if not c.passed]


def test_equation_from_coefficient_errors():
    assert equation_from_coefficient(parse("k0(3)+k1(3)+1")) == AffineEquation((3,), 1)
    for bad in ["k0(3)*k1(3)", "v5+k0(1)+k1(1)", "k0(3)+k1(4)"]:
        with pytest.raises(ValueError):
            equation_from_coefficient(parse(bad))


def test_normalization_is_an_involution():
    p = parse("k0(57)+k1(57)+k1(3)*k0(58)")
    assert normalize_round_constant(normalize_round_constant(p)) == p
    assert normalized_equation(AffineEquation((58,), 0)) == AffineEquation((58,), 1)


def test_degree_two_when_conditions_hold_three_on_violation():
    rng = random.Random(5)
    for i in (CLEAN[0], CLEAN[3]):
        system = derive_key_conditions(extract_cubic_coefficients(i, AUX_OFFSETS)).as_dict()
        key = key_with_conditions(system, rng)
        assert max_cube_degree(key, i) == 2
        for p in system:
            assert max_cube_degree(key_with_conditions(system, rng, flip=p), i) == 3


def test_one_round_degree_is_two():
    assert max_cube_degree(MasterKey(0xFFFFFFFFFFFFFFFF, 0), 5, rounds=1) == 2


def test_restricted_columns_agree_with_full_state():
    rng = random.Random(11)
    for _ in range(6):
        i = rng.randrange(64)
        key = MasterKey(rng.getrandbits(64), rng.getrandbits(64))
        full = max_cube_degree(key, i)
        fast = max_cube_degree(key, i, columns=degree_columns(i))
        assert full == fast


def test_table_text_export():
    text = extract_cubic_coefficients(CLEAN[0]).to_text()
    assert text.splitlines()[0].startswith(f"position {CLEAN[0]} flavor 128")
    assert "v64" in text
