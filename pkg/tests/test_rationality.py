import numpy as np

from ascon_cube.cube import validate_spec
from ascon_cube.rationality import bit_frequencies, monomial_presence, random_pair_cube


def test_pair_cube_shape():
    spec = random_pair_cube(np.random.default_rng(0), 16, 5)
    assert validate_spec(spec).ok and spec.dimension == 17
    low = {p.bit for p in spec.placements if p.word == 3}
    high = [p for p in spec.placements if p.word == 4]
    assert len(low) == 16 and len(high) == 1
    assert high[0].bit in low and high[0].var == 16


def test_presence_is_seeded():
    a = monomial_presence(30, seed=4)
    b = monomial_presence(30, seed=4)
    assert a == b and 0 <= a.nonzero <= 30


def test_frequencies_structure():
    r = bit_frequencies(20, seed=2)
    assert len(r.counts) == 64 and r.keys == 20
    assert r.to_dict()["always_zero"] == r.always_zero()
    assert r.histogram().count("\n") == 64


def test_frequencies_cover_both_rate_words_for_128a():
    r = bit_frequencies(5, rounds=4, seed=1, flavor="128a")
    assert len(r.counts) == 128


def test_lower_rounds_saturate():
    # after 3 rounds a 17-dimensional cube sum vanishes: degree 8 < 17
    assert monomial_presence(20, rounds=3, seed=9).nonzero == 0
