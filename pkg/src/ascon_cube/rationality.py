"""Statistical checks that a high-degree cube monomial survives in the rate output.

Cube shape for dimension ``d+1``: ``d`` variables at distinct random
positions of ``S0[3]`` and one more at ``S0[4]`` under the first of them, so
exactly one quadratic term appears after the first S-box layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ascon_cube.core import Flavor, MasterKey, get_bit
from ascon_cube.cube import CubeSpec, FreeBitPolicy, cube_sum_parallel, make_spec


def random_pair_cube(
    rng: np.random.Generator, base_vars: int, rounds: int, flavor: Flavor | str = Flavor.ASCON128
) -> CubeSpec:
    positions = [int(p) for p in rng.choice(64, size=base_vars, replace=False)]
    groups = [[(3, p)] for p in positions] + [[(4, positions[0])]]
    seed = int(rng.integers(0, 1 << 63))
    return make_spec(groups, rounds=rounds, flavor=flavor, free_policy=FreeBitPolicy.seeded(seed))


@dataclass(frozen=True)
class MonomialPresence:
    """Outcome of the many-cubes test."""

    trials: int
    nonzero: int
    rounds: int
    dimension: int

    @property
    def fraction(self) -> float:
        return self.nonzero / self.trials if self.trials else 0.0

    def to_dict(self) -> dict:
        return {
            "test": "random cubes",
            "rounds": self.rounds,
            "dimension": self.dimension,
            "trials": self.trials,
            "nonzero": self.nonzero,
            "fraction": self.fraction,
        }


def monomial_presence(
    trials: int = 1000,
    base_vars: int = 16,
    rounds: int = 5,
    seed: int = 0,
    flavor: Flavor | str = Flavor.ASCON128,
    workers: int = 1,
) -> MonomialPresence:
    """Fraction of random cubes (fresh key each) whose rate cube sum is nonzero."""
    rng = np.random.default_rng(seed)
    nonzero = 0
    for _ in range(trials):
        spec = random_pair_cube(rng, base_vars, rounds, flavor)
        key = MasterKey.random(rng)
        if not cube_sum_parallel(spec, key, workers).is_zero:
            nonzero += 1
    return MonomialPresence(trials, nonzero, rounds, base_vars + 1)


@dataclass(frozen=True)
class BitFrequencies:
    """Per output bit, how many keys gave a nonzero cube sum."""

    keys: int
    counts: tuple
    rounds: int
    cube: CubeSpec

    @property
    def frequencies(self) -> list[float]:
        return [c / self.keys for c in self.counts]

    def always_zero(self) -> list[int]:
        return [b for b, c in enumerate(self.counts) if c == 0]

    def above(self, threshold: float) -> list[int]:
        return [b for b, f in enumerate(self.frequencies) if f > threshold]

    def within(self, lo: float, hi: float) -> bool:
        return all(lo <= f <= hi for f in self.frequencies)

    def histogram(self) -> str:
        lines = ["bit  count  frequency"]
        for b, (c, f) in enumerate(zip(self.counts, self.frequencies)):
            lines.append(f"{b:3d}  {c:5d}  {f:.6f}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "test": "per-bit frequencies",
            "rounds": self.rounds,
            "dimension": self.cube.dimension,
            "keys": self.keys,
            "counts": list(self.counts),
            "always_zero": self.always_zero(),
            "cube": self.cube.to_dict(),
        }


def bit_frequencies(
    keys: int = 200,
    base_vars: int = 16,
    rounds: int = 5,
    seed: int = 0,
    flavor: Flavor | str = Flavor.ASCON128,
    workers: int = 1,
) -> BitFrequencies:
    """One random cube, many keys: nonzero frequency of each rate bit of the cube sum."""
    rng = np.random.default_rng(seed)
    spec = random_pair_cube(rng, base_vars, rounds, flavor)
    width = 64 * spec.params.rate_words
    counts = [0] * width
    for _ in range(keys):
        sums = cube_sum_parallel(spec, MasterKey.random(rng), workers).sums
        for w, word in enumerate(sums):
            for b in range(64):
                counts[64 * w + b] += get_bit(word, b)
    return BitFrequencies(keys, tuple(counts), rounds, spec)
