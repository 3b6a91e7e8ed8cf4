"""Cube specifications over nonce bits and exact cube sums of the init oracle.

A cube variable may occupy several nonce positions at once (a *tied*
placement), e.g. ``S0[3][j] = S0[4][j] = v``.  Positions are big-endian
bit indices into nonce word 3 or 4.
"""

from __future__ import annotations

import enum
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from ascon_cube import _kernels
from ascon_cube.core import (
    AsconState,
    CipherParams,
    Flavor,
    MasterKey,
    PA_ROUNDS,
    ascon_round,
    initial_state,
    mask,
    round_constant,
    word_hex,
    NonceWords,
    WORD_MASK,
)
from ascon_cube.errors import PlanOnlyError

EXECUTABLE_MAX_DIM = 34
NONCE_WORDS = (3, 4)


class FreePolicyKind(enum.Enum):
    ZERO = "zero"
    SEEDED_RANDOM = "seeded_random"


@dataclass(frozen=True)
class FreeBitPolicy:
    """Value of nonce bits that are neither cube positions nor fixed."""

    kind: FreePolicyKind = FreePolicyKind.ZERO
    seed: int | None = None

    @classmethod
    def zero(cls) -> "FreeBitPolicy":
        return cls()

    @classmethod
    def seeded(cls, seed: int) -> "FreeBitPolicy":
        return cls(FreePolicyKind.SEEDED_RANDOM, int(seed))

    def words(self) -> tuple[int, int]:
        if self.kind is FreePolicyKind.ZERO:
            return 0, 0
        rng = np.random.default_rng(self.seed)
        n3, n4 = (int(x) for x in rng.integers(0, 1 << 64, size=2, dtype=np.uint64))
        return n3, n4


@dataclass(frozen=True, order=True)
class Placement:
    var: int
    word: int
    bit: int


@dataclass(frozen=True, order=True)
class FixedBit:
    word: int
    bit: int
    value: int


@dataclass(frozen=True)
class CubeSpec:
    dimension: int
    placements: tuple[Placement, ...]
    fixed_bits: tuple[FixedBit, ...] = ()
    rounds: int = 5
    flavor: Flavor = Flavor.ASCON128
    free_policy: FreeBitPolicy = field(default_factory=FreeBitPolicy.zero)

    def __post_init__(self):
        object.__setattr__(self, "placements", tuple(self.placements))
        object.__setattr__(self, "fixed_bits", tuple(self.fixed_bits))
        object.__setattr__(self, "flavor", Flavor.parse(self.flavor))

    @property
    def params(self) -> CipherParams:
        return CipherParams.for_flavor(self.flavor)

    @property
    def plan_only(self) -> bool:
        return self.dimension > EXECUTABLE_MAX_DIM

    def positions_of(self, var: int) -> list[tuple[int, int]]:
        return [(p.word, p.bit) for p in self.placements if p.var == var]

    def restrict(self, var: int, value: int) -> "CubeSpec":
        """Pin ``var`` to ``value``; later variables are renumbered down by one."""
        if not 0 <= var < self.dimension:
            raise ValueError(f"variable {var} not in cube of dimension {self.dimension}")
        placements, fixed = [], list(self.fixed_bits)
        for p in self.placements:
            if p.var == var:
                fixed.append(FixedBit(p.word, p.bit, value & 1))
            else:
                placements.append(Placement(p.var - (p.var > var), p.word, p.bit))
        return replace(self, dimension=self.dimension - 1, placements=tuple(placements), fixed_bits=tuple(fixed))

    def to_dict(self) -> dict:
        return {
            "flavor": self.flavor.value,
            "rounds": self.rounds,
            "dimension": self.dimension,
            "placements": [{"var": p.var, "word": p.word, "bit": p.bit} for p in self.placements],
            "fixed": [{"word": f.word, "bit": f.bit, "value": f.value} for f in self.fixed_bits],
            "free_policy": self.free_policy.kind.value,
            "seed": self.free_policy.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CubeSpec":
        kind = FreePolicyKind(data.get("free_policy", "zero"))
        policy = FreeBitPolicy(kind, data.get("seed") if kind is FreePolicyKind.SEEDED_RANDOM else None)
        return cls(
            dimension=int(data["dimension"]),
            placements=tuple(Placement(int(p["var"]), int(p["word"]), int(p["bit"])) for p in data["placements"]),
            fixed_bits=tuple(FixedBit(int(f["word"]), int(f["bit"]), int(f["value"])) for f in data.get("fixed", [])),
            rounds=int(data["rounds"]),
            flavor=Flavor.parse(data["flavor"]),
            free_policy=policy,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CubeSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    position: tuple[int, int] | None = None


@dataclass(frozen=True)
class SpecCheck:
    ok: bool
    plan_only: bool
    violation: Violation | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_spec(spec: CubeSpec) -> SpecCheck:
    """Check every structural rule; report the first violation found."""

    def bad(code, message, position=None):
        return SpecCheck(False, spec.plan_only, Violation(code, message, position))

    if spec.dimension < 0:
        return bad("dimension", f"negative dimension {spec.dimension}")
    if not 1 <= spec.rounds <= PA_ROUNDS:
        return bad("rounds", f"round count {spec.rounds} outside 1..{PA_ROUNDS}")
    seen: dict[tuple[int, int], str] = {}
    for p in spec.placements:
        pos = (p.word, p.bit)
        if p.word not in NONCE_WORDS or not 0 <= p.bit <= 63:
            return bad("position", f"placement of v{p.var} outside the nonce words", pos)
        if not 0 <= p.var < spec.dimension:
            return bad("var-index", f"variable v{p.var} outside 0..{spec.dimension - 1}", pos)
        if pos in seen:
            return bad("position reused", f"S0[{p.word}][{p.bit}] already holds {seen[pos]}", pos)
        seen[pos] = f"v{p.var}"
    for f in spec.fixed_bits:
        pos = (f.word, f.bit)
        if f.word not in NONCE_WORDS or not 0 <= f.bit <= 63:
            return bad("position", "fixed bit outside the nonce words", pos)
        if f.value not in (0, 1):
            return bad("value", f"fixed value {f.value} is not a bit", pos)
        if pos in seen:
            return bad("position reused", f"S0[{f.word}][{f.bit}] already holds {seen[pos]}", pos)
        seen[pos] = f"fixed {f.value}"
    used = {p.var for p in spec.placements}
    missing = sorted(set(range(spec.dimension)) - used)
    if missing:
        return bad("unused variable", f"variable v{missing[0]} has no placement")
    return SpecCheck(True, spec.plan_only)


@dataclass(frozen=True)
class CubeSumResult:
    sums: tuple[int, ...]
    evaluations: int
    worker_evaluations: tuple[int, ...] = ()

    @property
    def is_zero(self) -> bool:
        return not any(self.sums)

    def hex(self) -> list[str]:
        return [word_hex(w) for w in self.sums]

    def to_dict(self) -> dict:
        return {"sums": self.hex(), "evaluations": self.evaluations}


def base_nonce(spec: CubeSpec) -> NonceWords:
    """Nonce with every cube variable at 0, fixed bits set, free bits per policy."""
    words = dict(zip(NONCE_WORDS, spec.free_policy.words()))
    for p in spec.placements:
        words[p.word] &= ~mask(p.bit) & WORD_MASK
    for f in spec.fixed_bits:
        words[f.word] = (words[f.word] & ~mask(f.bit) & WORD_MASK) | (mask(f.bit) if f.value else 0)
    return NonceWords(words[3], words[4])


def var_masks(spec: CubeSpec) -> list[tuple[int, int]]:
    """Per variable, the (n3, n4) machine masks it toggles."""
    out = [[0, 0] for _ in range(spec.dimension)]
    for p in spec.placements:
        out[p.var][p.word - 3] |= mask(p.bit)
    return [tuple(m) for m in out]


def first_round_is_affine(spec: CubeSpec) -> bool:
    """True if no S-box column of round 0 sees two different cube variables."""
    col_var: dict[int, int] = {}
    for p in spec.placements:
        if col_var.setdefault(p.bit, p.var) != p.var:
            return False
    return True


def _kernel_inputs(spec: CubeSpec, key: MasterKey):
    """Start state, per-variable deltas and remaining round constants."""
    params = spec.params
    s0 = initial_state(key, base_nonce(spec), params)
    masks = var_masks(spec)
    if spec.rounds >= 2 and first_round_is_affine(spec):
        rc0 = round_constant(0)
        s1 = ascon_round(s0, rc0)
        deltas = []
        for m3, m4 in masks:
            flipped = AsconState((s0[0], s0[1], s0[2], s0[3] ^ m3, s0[4] ^ m4))
            deltas.append(ascon_round(flipped, rc0).xor(s1).words)
        start, first = s1.words, 1
    else:
        deltas = [(0, 0, 0, m3, m4) for m3, m4 in masks]
        start, first = s0.words, 0
    rcs = np.array([round_constant(r) for r in range(first, spec.rounds)], dtype=np.uint64)
    return (
        np.array(start, dtype=np.uint64),
        np.array(deltas, dtype=np.uint64).reshape(len(deltas), 5),
        rcs,
    )


def _check_executable(spec: CubeSpec) -> None:
    check = validate_spec(spec)
    if not check.ok:
        raise ValueError(f"invalid cube spec: {check.violation.message}")
    if check.plan_only:
        raise PlanOnlyError(
            f"cube of dimension {spec.dimension} exceeds the executable cap of {EXECUTABLE_MAX_DIM}; plan-only"
        )


def _finish(spec: CubeSpec, acc0: int, acc1: int, per_worker: Sequence[int]) -> CubeSumResult:
    s0 = int(_kernels.sigma0(np.uint64(acc0)))
    s1 = int(_kernels.sigma1(np.uint64(acc1)))
    sums = (s0,) if spec.params.rate_words == 1 else (s0, s1)
    return CubeSumResult(sums, 1 << spec.dimension, tuple(per_worker))


def _chunks(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    step, extra = divmod(total, parts)
    out, lo = [], 0
    for k in range(parts):
        hi = lo + step + (k < extra)
        out.append((lo, hi))
        lo = hi
    return out


def cube_sum_parallel(spec: CubeSpec, key: MasterKey, workers: int = 1) -> CubeSumResult:
    """XOR of the rate words over all 2^d cube assignments, split across threads.

    The outer Gray counter is cut into contiguous ranges, one per worker; the
    per-range accumulators are XOR-combined, so the result does not depend
    on ``workers``.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    _check_executable(spec)
    start, deltas, rcs = _kernel_inputs(spec, key)
    if spec.dimension >= _kernels.LANE_BITS:
        kernel, lanes = _kernels.cube_sum_lanes, _kernels.LANES
        outer = 1 << (spec.dimension - _kernels.LANE_BITS)
    else:
        kernel, lanes = _kernels.cube_sum_scalar, 1
        outer = 1 << spec.dimension
    ranges = _chunks(outer, workers)
    if len(ranges) == 1:
        results = [kernel(start, deltas, rcs, 0, outer)]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            futures = [pool.submit(kernel, start, deltas, rcs, lo, hi) for lo, hi in ranges]
            results = [f.result() for f in futures]
    acc0 = acc1 = 0
    for a0, a1 in results:
        acc0 ^= int(a0)
        acc1 ^= int(a1)
    return _finish(spec, acc0, acc1, [(hi - lo) * lanes for lo, hi in ranges])


def cube_sum(spec: CubeSpec, key: MasterKey) -> CubeSumResult:
    """Single-worker cube sum."""
    return cube_sum_parallel(spec, key, workers=1)


def make_spec(
    cube_positions: Iterable[Sequence[tuple[int, int]]],
    fixed: Iterable[tuple[int, int, int]] = (),
    rounds: int = 5,
    flavor: Flavor | str = Flavor.ASCON128,
    free_policy: FreeBitPolicy | None = None,
) -> CubeSpec:
    """Build a spec from per-variable position lists ``[(word, bit), ...]``."""
    placements = []
    groups = list(cube_positions)
    for var, positions in enumerate(groups):
        for word, bit in positions:
            placements.append(Placement(var, word, bit % 64))
    return CubeSpec(
        dimension=len(groups),
        placements=tuple(placements),
        fixed_bits=tuple(FixedBit(w, b % 64, v) for w, b, v in fixed),
        rounds=rounds,
        flavor=Flavor.parse(flavor),
        free_policy=free_policy or FreeBitPolicy.zero(),
    )
