"""Seven-round key-subset plan: cube families, subset conditions, filter chains, cost ledger.

Nothing here executes a 65-variable cube sum.  Subset conditions come from
the symbolic derivation in :mod:`ascon_cube.anf.coefficients`; the printed
condition shapes are only used as a cross-check.
"""

from __future__ import annotations

import enum
import json
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable

from ascon_cube.anf import expected
from ascon_cube.anf.coefficients import (
    AUX_OFFSETS,
    HIGH_VAR,
    AffineEquation,
    degree_columns,
    derive_key_conditions,
    extract_cubic_coefficients,
    iv_bit,
    max_cube_degree,
    seven_round_slots,
)
from ascon_cube.anf.verify import expected_family_system, key_with_conditions, offset_system
from ascon_cube.core import Flavor, MasterKey, get_bit
from ascon_cube.cube import CubeSpec, FreeBitPolicy, Placement, validate_spec
from ascon_cube.errors import ConsistencyError

SEVEN_ROUNDS = 7
CUBE_DIM = 65
KEY_BITS = 128


class SubsetKind(enum.Enum):
    U = "U"
    UPRIME = "Uprime"


class CubeCase(enum.IntEnum):
    ONE = 1
    TWO = 2


def case_of(i: int, flavor: Flavor | str) -> CubeCase:
    return CubeCase.TWO if iv_bit(flavor, i + 1) or iv_bit(flavor, i + 6) else CubeCase.ONE


def freed_offset(i: int, flavor: Flavor | str) -> int | None:
    """Auxiliary offset released to the control menu when an IV bit makes it redundant."""
    if iv_bit(flavor, i + 1):
        return 1
    if iv_bit(flavor, i + 6):
        return 6
    return None


def family_menu(i: int, case: CubeCase, flavor: Flavor | str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(auxiliary offsets, control menu) for position ``i`` in ``case``."""
    if case is CubeCase.ONE:
        return AUX_OFFSETS, expected.CONTROL_OFFSETS
    freed = freed_offset(i, flavor)
    if freed is None:
        raise ValueError(f"position {i}: IV(i+1) and IV(i+6) are both 0, no second-case cube exists")
    return tuple(a for a in AUX_OFFSETS if a != freed), (freed,) + expected.CONTROL_OFFSETS


def mask_offsets(menu: tuple[int, ...], mask: int) -> tuple[int, ...]:
    """Control offsets selected by bit ``k`` of ``mask`` for ``menu[k]``."""
    return tuple(off for k, off in enumerate(menu) if mask >> k & 1)


def materialize_cube(
    i: int,
    control: Iterable[int] = (),
    case: CubeCase | int = CubeCase.ONE,
    flavor: Flavor | str = Flavor.ASCON128,
) -> CubeSpec:
    """The 65-variable cube for position ``i`` with the given control offsets (plan-only)."""
    case = CubeCase(case)
    flavor = Flavor.parse(flavor)
    aux, menu = family_menu(i, case, flavor)
    control = tuple(control)
    stray = sorted(set(control) - set(menu))
    if stray:
        raise ValueError(f"control offsets {stray} not in menu {list(menu)}")
    placements = [Placement(var, word, bit) for word, bit, var in seven_round_slots(i, aux, control)]
    spec = CubeSpec(
        dimension=CUBE_DIM,
        placements=tuple(sorted(placements)),
        rounds=SEVEN_ROUNDS,
        flavor=flavor,
        free_policy=FreeBitPolicy.zero(),
    )
    check = validate_spec(spec)
    if not check.ok:
        raise ConsistencyError(f"materialized cube invalid: {check.violation.message}")
    return spec


@dataclass(frozen=True)
class KeySubset:
    kind: SubsetKind
    i: int
    case: CubeCase
    conditions: tuple  # AffineEquation, true-key convention
    aux: tuple
    menu: tuple
    family: tuple  # per mask: KeyConditionSystem as {position: value}
    flavor: Flavor

    @property
    def tests(self) -> int:
        return 1 << len(self.menu)

    @property
    def test_cost_log2(self) -> float:
        return CUBE_DIM + math.log2(self.tests)

    @property
    def name(self) -> str:
        return f"{self.kind.value}_{self.i}"

    def contains(self, key: MasterKey) -> bool:
        return all(e.holds(key) for e in self.conditions)

    def cube(self, mask: int) -> CubeSpec:
        return materialize_cube(self.i, mask_offsets(self.menu, mask), self.case, self.flavor)

    def cube_family(self) -> list[CubeSpec]:
        return [self.cube(m) for m in range(self.tests)]

    def cube_file(self, mask: int) -> str:
        return f"{self.name}_mask{mask:03d}.json"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "i": self.i,
            "case": int(self.case),
            "conditions": [e.to_text() for e in self.conditions],
            "auxiliary_offsets": list(self.aux),
            "control_menu": list(self.menu),
            "tests": self.tests,
            "test_cost_log2": self.test_cost_log2,
            "cube_files": [self.cube_file(m) for m in range(self.tests)],
        }


@dataclass(frozen=True)
class ComplexityReport:
    """``terms`` are log2 costs of the worst-case recovery; ``total_log2`` is their log2-sum."""

    terms: dict
    total_log2: float
    weak_key_terms: dict
    weak_key_log2: float
    remaining_log2: float
    cube_testing_log2: float
    filter_log2: float

    def rounded(self) -> dict:
        return {
            "cube_testing": round(self.cube_testing_log2, 2),
            "filter": round(self.filter_log2, 2),
            "remaining": round(self.remaining_log2, 2),
            "worst_case": round(self.total_log2, 2),
            "weak_key": round(self.weak_key_log2, 2),
        }

    def to_dict(self) -> dict:
        return {
            "terms_log2": dict(self.terms),
            "total_log2": self.total_log2,
            "weak_key_terms_log2": dict(self.weak_key_terms),
            "weak_key_log2": self.weak_key_log2,
            "remaining_log2": self.remaining_log2,
            "cube_testing_log2": self.cube_testing_log2,
            "filter_log2": self.filter_log2,
            "rounded": self.rounded(),
        }


def log2_sum(values_log2: Iterable[float]) -> float:
    vals = list(values_log2)
    top = max(vals)
    return top + math.log2(sum(2.0 ** (v - top) for v in vals))


@dataclass(frozen=True)
class SubsetPlan:
    flavor: Flavor
    subsets: tuple
    ki_chains: tuple  # KI_0 first, then the filter chains
    dropped: tuple  # (i, reason) for positions that yield no new subset
    ledger: ComplexityReport

    def of_kind(self, kind: SubsetKind) -> list[KeySubset]:
        return [s for s in self.subsets if s.kind is kind]

    def subset(self, kind: SubsetKind, i: int) -> KeySubset:
        for s in self.subsets:
            if s.kind is kind and s.i == i:
                return s
        raise KeyError((kind, i))

    @property
    def cube_count(self) -> int:
        return sum(s.tests for s in self.subsets)

    def to_dict(self) -> dict:
        return {
            "flavor": self.flavor.value,
            "subsets": [s.to_dict() for s in self.subsets],
            "counts": {k.value: len(self.of_kind(k)) for k in SubsetKind},
            "dropped": [{"i": i, "reason": r} for i, r in self.dropped],
            "ki_chains": [list(c) for c in self.ki_chains],
            "chain_lengths": [len(c) for c in self.ki_chains[1:]],
            "ledger": self.ledger.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def filtration_count(n: int) -> int:
    """Binary strings of length ``n`` with no two adjacent zeros (linear chain)."""
    if n < 0:
        raise ValueError("chain length must be non-negative")
    a, b = 1, 2  # counts for lengths 0 and 1
    for _ in range(n):
        a, b = b, a + b
    return a


@lru_cache(maxsize=None)
def _family(i: int, case: CubeCase, flavor: Flavor) -> tuple:
    aux, menu = family_menu(i, case, flavor)
    out = []
    for mask in range(1 << len(menu)):
        system = derive_key_conditions(extract_cubic_coefficients(i, aux, mask_offsets(menu, mask), flavor))
        if not system.feasible:
            raise ConsistencyError(f"{case.name} family at i={i}, mask {mask}: {system.to_text()}")
        out.append(system)
    return tuple(out)


def _subset(i: int, flavor: Flavor) -> KeySubset:
    case = case_of(i, flavor)
    aux, menu = family_menu(i, case, flavor)
    systems = _family(i, case, flavor)
    dicts = [s.as_dict() for s in systems]
    common = {p: v for p, v in dicts[0].items() if all(d.get(p) == v for d in dicts[1:])}
    kind = SubsetKind.U if case is CubeCase.ONE else SubsetKind.UPRIME
    want = 2 if kind is SubsetKind.U else 1
    if len(common) != want:
        raise ConsistencyError(f"i={i}: {len(common)} shared conditions, expected {want}")
    if len({tuple(sorted(d.items())) for d in dicts}) != len(dicts):
        raise ConsistencyError(f"i={i}: two control combinations share a condition system")
    for mask, system in enumerate(systems):
        if offset_system(system, i) != expected_family_system(i, flavor, mask_offsets(menu, mask)):
            raise ConsistencyError(f"i={i}, mask {mask}: derived {system.to_text()} differs from the printed shape")
    conditions = tuple(AffineEquation((p,), v) for p, v in sorted(common.items()))
    return KeySubset(kind, i, case, conditions, aux, menu, tuple(dicts), flavor)


def _primed_order(i: int, flavor: Flavor) -> tuple[int, int]:
    """Order U' subsets by the IV bit that created them, first via i+1 then via i+6."""
    return (0, (i + 1) % 64) if iv_bit(flavor, i + 1) else (1, (i + 6) % 64)


def derive_chains(u_subsets: Iterable[KeySubset], known: dict[int, int]) -> list[tuple[int, ...]]:
    """Paths formed by the U-subset pairs after dropping pairs made vacuous by ``known``.

    Outside a U subset its two conditions cannot both hold.  ``known`` maps
    b-bit positions to values already forced (outside every U' subset); a pair
    with a known bit that contradicts its condition constrains nothing.
    """
    nxt: dict[int, int] = {}
    prv: dict[int, int] = {}
    nodes = set()
    for s in u_subsets:
        a, b = (s.i + 1) % 64, (s.i + 6) % 64
        want = {e.positions[0]: e.rhs for e in s.conditions}
        if set(want) != {a, b}:
            raise ConsistencyError(f"{s.name}: conditions {want} are not at i+1 and i+6")
        touched = [p for p in (a, b) if p in known]
        if touched:
            if any(known[p] == want[p] for p in touched):
                raise ConsistencyError(f"{s.name}: known bit agrees with its condition")
            continue
        if a in nxt or b in prv:
            raise ConsistencyError(f"b-bit {a} or {b} joins more than two filter pairs")
        nxt[a], prv[b] = b, a
        nodes |= {a, b}
    chains = []
    seen = set()
    for start in sorted(n for n in nodes if n not in prv):
        chain = [start]
        while chain[-1] in nxt:
            chain.append(nxt[chain[-1]])
        chains.append(tuple(chain))
        seen |= set(chain)
    if seen != nodes:
        raise ConsistencyError("filter pairs contain a cycle")
    return chains


def complexity_ledger_from(plan_subsets: list[KeySubset], ki0: tuple, chains: list[tuple], flavor: Flavor) -> ComplexityReport:
    primed = [s for s in plan_subsets if s.kind is SubsetKind.UPRIME]
    cube_testing = log2_sum([s.test_cost_log2 for s in plan_subsets])
    chain_ratio = sum(math.log2(filtration_count(len(c))) - len(c) for c in chains)
    remaining = KEY_BITS - len(ki0) + chain_ratio
    filter_cost = log2_sum([float(len(c)) for c in chains]) if chains else 0.0
    terms = {
        "one_bit_checks": float(len(ki0)),
        "chain_checks": filter_cost,
        "remaining_subset": remaining,
        "cube_testing": cube_testing,
    }
    recovered = weak_key_recovered_bits(primed)
    weak_terms = {
        "exhaustive": float(KEY_BITS - len(recovered)),
        "cube_testing": log2_sum([s.test_cost_log2 for s in primed]),
    }
    return ComplexityReport(
        terms=terms,
        total_log2=log2_sum(terms.values()),
        weak_key_terms=weak_terms,
        weak_key_log2=log2_sum(weak_terms.values()),
        remaining_log2=remaining,
        cube_testing_log2=cube_testing,
        filter_log2=filter_cost,
    )


def weak_key_recovered_bits(primed: Iterable[KeySubset]) -> set[int]:
    """b-bit positions fixed by identifying the control mask in every U' subset."""
    bits: set[int] = set()
    for s in primed:
        for d in s.family:
            bits |= set(d)
    return bits


@lru_cache(maxsize=None)
def build_plan(flavor: Flavor | str = Flavor.ASCON128) -> SubsetPlan:
    flavor = Flavor.parse(flavor)
    primed: list[KeySubset] = []
    u: list[KeySubset] = []
    dropped: list[tuple[int, str]] = []
    for i in range(64):
        s = _subset(i, flavor)
        (u if s.kind is SubsetKind.U else primed).append(s)
    primed.sort(key=lambda s: _primed_order(s.i, flavor))
    unique: list[KeySubset] = []
    for s in primed:
        if any(t.conditions == s.conditions for t in unique):
            dropped.append((s.i, f"condition {s.conditions[0].to_text()} duplicates an earlier subset"))
            continue
        unique.append(s)
    ki0 = tuple(s.conditions[0].positions[0] for s in unique)
    outside_primed = {s.conditions[0].positions[0]: 1 - s.conditions[0].rhs for s in unique}
    chains = derive_chains(u, outside_primed)
    _check_partition(ki0, chains)
    subsets = tuple(unique + sorted(u, key=lambda s: s.i))
    ledger = complexity_ledger_from(list(subsets), ki0, chains, flavor)
    return SubsetPlan(flavor, subsets, (ki0,) + tuple(chains), tuple(dropped), ledger)


def _check_partition(ki0: tuple, chains: list[tuple]) -> None:
    seen = set(ki0)
    if len(seen) != len(ki0):
        raise ConsistencyError("KI_0 repeats a position")
    for c in chains:
        if seen & set(c):
            raise ConsistencyError(f"chain {c} overlaps an earlier chain")
        seen |= set(c)


def complexity_ledger(flavor: Flavor | str = Flavor.ASCON128) -> ComplexityReport:
    return build_plan(flavor).ledger


def emit_cube_files(plan: SubsetPlan, directory: str | Path) -> int:
    """Write one CubeSpec JSON file per (subset, control mask); returns the count."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    n = 0
    for s in plan.subsets:
        for mask in range(s.tests):
            (out / s.cube_file(mask)).write_text(s.cube(mask).to_json() + "\n")
            n += 1
    return n


# --- identification with the degree oracle --------------------------------


@dataclass(frozen=True)
class Identification:
    subset: str
    in_subset: bool
    mask: int | None
    control: tuple
    recovered: dict  # b-bit position -> value
    zero_masks: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "subset": self.subset,
            "in_subset": self.in_subset,
            "mask": self.mask,
            "control": list(self.control),
            "recovered": {str(k): v for k, v in sorted(self.recovered.items())},
        }


def cube_reads_zero(key: MasterKey, subset: KeySubset, mask: int, full_state: bool = False) -> bool:
    """Stand-in for the 65-variable cube sum: zero iff no cubic term survives two rounds.

    The restricted evaluation looks only at the three round-two S-boxes that
    receive ``v_i*v64``; every other S-box has affine inputs.
    """
    columns = None if full_state else degree_columns(subset.i)
    deg = max_cube_degree(
        key, subset.i, subset.aux, mask_offsets(subset.menu, mask), flavor=subset.flavor, columns=columns
    )
    return deg <= 2


def simulate_subset_identification(key: MasterKey, subset: KeySubset, full_state: bool = False) -> Identification:
    zeros = tuple(m for m in range(subset.tests) if cube_reads_zero(key, subset, m, full_state))
    if not zeros:
        return Identification(subset.name, False, None, (), {})
    if len(zeros) > 1:
        raise ConsistencyError(f"{subset.name}: masks {zeros} all read zero")
    mask = zeros[0]
    return Identification(
        subset.name, True, mask, mask_offsets(subset.menu, mask), dict(subset.family[mask]), zeros
    )


def random_key_in(subset: KeySubset, rng: random.Random, mask: int | None = None) -> MasterKey:
    """A uniformly random key satisfying the subset (and mask system, if given)."""
    conds = {e.positions[0]: e.rhs for e in subset.conditions}
    if mask is not None:
        conds.update(subset.family[mask])
    return key_with_conditions(conds, rng)


def b_bits(key: MasterKey) -> int:
    return key.k0 ^ key.k1


def matches_key(identification: Identification, key: MasterKey) -> bool:
    return all(get_bit(b_bits(key), p) == v for p, v in identification.recovered.items())


__all__ = [
    "CubeCase",
    "SubsetKind",
    "KeySubset",
    "SubsetPlan",
    "ComplexityReport",
    "Identification",
    "materialize_cube",
    "build_plan",
    "filtration_count",
    "complexity_ledger",
    "simulate_subset_identification",
    "emit_cube_files",
    "HIGH_VAR",
]
