"""Conditional-cube key recovery against the 5- and 6-round initialization.

For every key position ``t`` a handful of cubes is summed.  Each cube's
sums are identically zero when a single key condition holds, so any
nonzero sum proves the opposite value of ``k0(t)`` or ``k0(t)+k1(t)``.
Bits that no cube decides are left for exhaustive completion.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from ascon_cube import _kernels
from ascon_cube.core import (
    CipherParams,
    Flavor,
    MasterKey,
    NonceWords,
    get_bit,
    init_oracle,
    mask,
    one_bits,
    round_constant,
    word_hex,
)
from ascon_cube.cube import (
    CubeSpec,
    CubeSumResult,
    FixedBit,
    FreeBitPolicy,
    Placement,
    cube_sum_parallel,
)
from ascon_cube.errors import NoCandidateError, ResourceLimitError

SET_IDS = ("1", "2", "3", "4", "5")


def constant_flipped_positions() -> list[int]:
    """Positions of x2 that the first round constant sets to 1 (56..59)."""
    return one_bits(round_constant(0))


class InitOracle:
    """Keyed black box returning rate words; counts every query."""

    def __init__(self, key: MasterKey, rounds: int, params: CipherParams):
        self._key = key
        self.rounds = rounds
        self.params = params
        self.queries = 0

    def query(self, nonce: NonceWords) -> tuple[int, ...]:
        self.queries += 1
        return init_oracle(self._key, nonce, self.rounds, self.params)

    def cube_sum(self, spec: CubeSpec, workers: int = 1) -> CubeSumResult:
        if spec.rounds != self.rounds or spec.flavor is not self.params.flavor:
            raise ValueError("cube spec does not match the oracle's rounds/flavor")
        result = cube_sum_parallel(spec, self._key, workers)
        self.queries += result.evaluations
        return result


@dataclass(frozen=True)
class ParamSet:
    set_id: str
    target: str  # "k0" or "xor"
    nonzero_means: int
    vars: tuple[tuple[tuple[int, int], ...], ...]
    fixed: tuple[tuple[int, int, int], ...]

    def spec(self, t: int, rounds: int, flavor: Flavor, free_policy: FreeBitPolicy) -> CubeSpec:
        placements = tuple(
            Placement(v, word, (off + t) % 64) for v, group in enumerate(self.vars) for word, off in group
        )
        fixed = tuple(FixedBit(word, (off + t) % 64, val) for word, off, val in self.fixed)
        return CubeSpec(len(self.vars), placements, fixed, rounds, flavor, free_policy)


@dataclass(frozen=True)
class AttackParams:
    rounds: int
    dimension: int
    sets: dict[str, ParamSet]

    @classmethod
    def load(cls, rounds: int) -> "AttackParams":
        if rounds not in (5, 6):
            raise ValueError(f"no attack parameters for {rounds} rounds (only 5 or 6)")
        text = resources.files("ascon_cube.data").joinpath(f"round{rounds}.json").read_text()
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_dict(cls, data: dict) -> "AttackParams":
        sets = {}
        for set_id, s in data["sets"].items():
            sets[set_id] = ParamSet(
                set_id,
                s["target"],
                int(s["nonzero_means"]),
                tuple(tuple((int(w), int(o)) for w, o in group) for group in s["vars"]),
                tuple((int(w), int(o), int(v)) for w, o, v in s["fixed"]),
            )
        return cls(int(data["rounds"]), int(data["dimension"]), sets)

    def spec(self, set_id: str, t: int, flavor: Flavor | str = Flavor.ASCON128,
             free_policy: FreeBitPolicy | None = None) -> CubeSpec:
        return self.sets[set_id].spec(t, self.rounds, Flavor.parse(flavor), free_policy or FreeBitPolicy.zero())


@dataclass
class TStep:
    t: int
    sums: dict[str, list[str]] = field(default_factory=dict)
    k0: int | None = None
    xor: int | None = None

    def to_dict(self) -> dict:
        return {"t": self.t, "sums": self.sums, "k0": self.k0, "xor": self.xor}


@dataclass
class RecoveredKeyInfo:
    k0_bits: list[int | None] = field(default_factory=lambda: [None] * 64)
    xor_bits: list[int | None] = field(default_factory=lambda: [None] * 64)
    steps: list[TStep] = field(default_factory=list)

    @property
    def flags(self) -> list[list[int]]:
        return [[int(b is not None) for b in self.k0_bits], [int(b is not None) for b in self.xor_bits]]

    @property
    def remain(self) -> int:
        return sum(b is None for b in self.k0_bits) + sum(b is None for b in self.xor_bits)

    def errors_against(self, key: MasterKey) -> list[tuple[str, int]]:
        """Flagged entries that disagree with ``key``."""
        bad = []
        b = key.xor_word()
        for t in range(64):
            if self.k0_bits[t] is not None and self.k0_bits[t] != get_bit(key.k0, t):
                bad.append(("k0", t))
            if self.xor_bits[t] is not None and self.xor_bits[t] != get_bit(b, t):
                bad.append(("xor", t))
        return bad

    def to_dict(self) -> dict:
        return {
            "k0_bits": self.k0_bits,
            "xor_bits": self.xor_bits,
            "remain": self.remain,
            "steps": [s.to_dict() for s in self.steps],
        }


def per_cube_policy(free_seed: int | None, t: int, set_id: str) -> FreeBitPolicy:
    """Free-bit policy of one cube: all-zero, or random words keyed by (seed, t, set)."""
    if free_seed is None:
        return FreeBitPolicy.zero()
    state = np.random.SeedSequence([free_seed, t, int(set_id)]).generate_state(1, dtype=np.uint64)
    return FreeBitPolicy.seeded(int(state[0]))


def recover_bits(
    oracle: InitOracle,
    params: AttackParams,
    ts: Iterable[int] = range(64),
    workers: int = 1,
    free_seed: int | None = None,
) -> RecoveredKeyInfo:
    """Run the lazy five-cube tester for each position in ``ts``.

    ``free_seed=None`` sets every unconstrained nonce bit to zero; an integer
    draws them at random per cube, reproducibly.
    """
    if oracle.rounds != params.rounds:
        raise ValueError("oracle and parameter round counts differ")
    flavor = oracle.params.flavor
    iv_positions = set(oracle.params.iv_one_bits)
    rc_positions = set(constant_flipped_positions())
    info = RecoveredKeyInfo()

    for t in ts:
        step = TStep(t)

        def nonzero(set_id: str) -> bool:
            policy = per_cube_policy(free_seed, t, set_id)
            res = oracle.cube_sum(params.spec(set_id, t, flavor, policy), workers)
            step.sums[set_id] = res.hex()
            return not res.is_zero

        if nonzero("1"):
            info.k0_bits[t] = 1
        elif nonzero("2"):
            info.k0_bits[t] = 0

        if nonzero("3"):
            info.xor_bits[t] = 0 if t in rc_positions else 1
        elif t in iv_positions:
            if nonzero("4"):
                info.xor_bits[t] = 0
        elif nonzero("5"):
            info.xor_bits[t] = 1 if t in rc_positions else 0

        step.k0, step.xor = info.k0_bits[t], info.xor_bits[t]
        info.steps.append(step)
    return info


def attack_cost(params: AttackParams, n_positions: int = 64) -> int:
    """Worst-case oracle calls: two cubes per key row, two rows, per position."""
    return n_positions * 2 * 2 * (1 << params.dimension)


def _candidate_words(known: Sequence[int | None], unknown_slot: dict[int, int], idx: np.ndarray) -> np.ndarray:
    base = 0
    for t, b in enumerate(known):
        if b:
            base |= mask(t)
    out = np.full(idx.shape, base, dtype=np.uint64)
    for t, slot in unknown_slot.items():
        bit = (idx >> np.uint64(slot)) & np.uint64(1)
        out |= bit << np.uint64(63 - t)
    return out


@dataclass(frozen=True)
class Completion:
    key: MasterKey
    candidates_tested: int
    verification_nonces: tuple[NonceWords, ...]


def exhaustive_completion(
    info: RecoveredKeyInfo,
    oracle: InitOracle,
    seed: int = 0,
    budget_log2: int = 30,
    chunk_log2: int = 20,
) -> Completion:
    """Search the 2^remain keys consistent with ``info`` against two fresh nonces."""
    if info.remain > budget_log2:
        raise ResourceLimitError(f"remain={info.remain} exceeds the search budget 2^{budget_log2}")
    rng = np.random.default_rng(seed)
    nonces = tuple(
        NonceWords(*(int(x) for x in rng.integers(0, 1 << 64, size=2, dtype=np.uint64))) for _ in range(2)
    )
    targets = [oracle.query(n) for n in nonces]
    rw = oracle.params.rate_words
    rcs = np.array([round_constant(r) for r in range(oracle.rounds)], dtype=np.uint64)
    iv = np.uint64(oracle.params.iv)

    slots: dict[tuple[str, int], int] = {}
    for t in range(64):
        if info.k0_bits[t] is None:
            slots[("k0", t)] = len(slots)
    for t in range(64):
        if info.xor_bits[t] is None:
            slots[("xor", t)] = len(slots)
    k0_slots = {t: s for (row, t), s in slots.items() if row == "k0"}
    xor_slots = {t: s for (row, t), s in slots.items() if row == "xor"}

    total = 1 << info.remain
    step = 1 << chunk_log2
    tested = 0
    for lo in range(0, total, step):
        idx = np.arange(lo, min(total, lo + step), dtype=np.uint64)
        k0s = _candidate_words(info.k0_bits, k0_slots, idx)
        k1s = k0s ^ _candidate_words(info.xor_bits, xor_slots, idx)
        tested += idx.size
        hit = np.ones(idx.size, dtype=bool)
        for nonce, target in zip(nonces, targets):
            out = _kernels.batch_rate(iv, k0s, k1s, np.uint64(nonce.n3), np.uint64(nonce.n4), rcs)
            for w in range(rw):
                hit &= out[:, w] == np.uint64(target[w])
        found = np.flatnonzero(hit)
        if found.size:
            j = int(found[0])
            return Completion(MasterKey(int(k0s[j]), int(k1s[j])), tested, nonces)
    raise NoCandidateError("no candidate matched: the recovered bits are inconsistent with the oracle")


@dataclass
class AttackReport:
    flavor: str
    rounds: int
    positions: list[int]
    info: RecoveredKeyInfo
    oracle_calls: int
    predicted_cost: int
    recovered_key: str | None
    true_key: str
    candidates_tested: int = 0
    wall_seconds: float = 0.0

    @property
    def success(self) -> bool:
        if self.recovered_key is not None:
            return self.recovered_key == self.true_key
        key = MasterKey.from_hex(self.true_key)
        tested = set(self.positions)
        complete = all(
            self.info.k0_bits[t] is not None and self.info.xor_bits[t] is not None for t in tested
        )
        return complete and not self.info.errors_against(key)

    def to_dict(self) -> dict:
        # wall-clock time is deliberately excluded so reports are reproducible
        return {
            "flavor": self.flavor,
            "rounds": self.rounds,
            "positions": self.positions,
            "remain": self.info.remain,
            "oracle_calls": self.oracle_calls,
            "predicted_cost": self.predicted_cost,
            "candidates_tested": self.candidates_tested,
            "recovered_key": self.recovered_key,
            "true_key": self.true_key,
            "success": self.success,
            "recovered": self.info.to_dict(),
        }

    def text(self) -> str:
        lines = [f"Ascon-{self.flavor} {self.rounds}-round conditional cube attack"]
        lines.append(f"{'t':>3}  {'sums tried':<12} {'k0':>3} {'k0+k1':>6}")
        for s in self.info.steps:
            k0 = "?" if s.k0 is None else str(s.k0)
            xb = "?" if s.xor is None else str(s.xor)
            lines.append(f"{s.t:>3}  {','.join(s.sums):<12} {k0:>3} {xb:>6}")
        lines.append(f"remain: {self.info.remain}")
        lines.append(f"oracle calls: {self.oracle_calls} (worst case {self.predicted_cost})")
        if self.recovered_key is not None:
            lines.append(f"recovered key: {self.recovered_key} ({self.candidates_tested} candidates tested)")
        lines.append(f"result: {'MATCH' if self.success else 'MISMATCH'}")
        lines.append(f"wall clock: {self.wall_seconds:.2f}s")
        return "\n".join(lines)


def run_attack(
    key: MasterKey,
    rounds: int,
    flavor: Flavor | str = Flavor.ASCON128,
    ts: Sequence[int] | None = None,
    workers: int = 1,
    seed: int = 0,
    budget_log2: int = 30,
    complete: bool | None = None,
    free_seed: int | None = 0,
) -> AttackReport:
    """Full pipeline: tester over ``ts`` then, if every position ran, key completion.

    Free nonce bits are random per cube under ``free_seed``; pass ``None`` for
    all-zero free bits, which leaves noticeably more bits undecided.
    """
    params = AttackParams.load(rounds)
    cparams = CipherParams.for_flavor(flavor)
    oracle = InitOracle(key, rounds, cparams)
    positions = list(range(64)) if ts is None else [t % 64 for t in ts]
    started = time.perf_counter()
    info = recover_bits(oracle, params, positions, workers, free_seed)
    tester_calls = oracle.queries
    if complete is None:
        complete = len(set(positions)) == 64
    recovered, tested = None, 0
    if complete:
        done = exhaustive_completion(info, oracle, seed=seed, budget_log2=budget_log2)
        recovered, tested = done.key.hex(), done.candidates_tested
    return AttackReport(
        flavor=cparams.flavor.value,
        rounds=rounds,
        positions=positions,
        info=info,
        oracle_calls=tester_calls,
        predicted_cost=attack_cost(params, len(set(positions))),
        recovered_key=recovered,
        true_key=key.hex(),
        candidates_tested=tested,
        wall_seconds=time.perf_counter() - started,
    )


__all__ = [
    "AttackParams",
    "AttackReport",
    "Completion",
    "InitOracle",
    "ParamSet",
    "RecoveredKeyInfo",
    "attack_cost",
    "constant_flipped_positions",
    "exhaustive_completion",
    "recover_bits",
    "run_attack",
    "word_hex",
]
