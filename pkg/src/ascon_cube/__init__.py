"""Conditional cube attacks on round-reduced Ascon initialization."""

from ascon_cube.attack import AttackParams, InitOracle, exhaustive_completion, recover_bits, run_attack
from ascon_cube.core import AsconState, CipherParams, Flavor, MasterKey, NonceWords, init_oracle, permutation
from ascon_cube.cube import CubeSpec, FreeBitPolicy, cube_sum, cube_sum_parallel, make_spec, validate_spec
from ascon_cube.errors import ConsistencyError, NoCandidateError, PlanOnlyError, ResourceLimitError
from ascon_cube.planner import (
    build_plan,
    complexity_ledger,
    filtration_count,
    simulate_subset_identification,
)

__all__ = [
    "AsconState",
    "AttackParams",
    "CipherParams",
    "ConsistencyError",
    "CubeSpec",
    "Flavor",
    "FreeBitPolicy",
    "InitOracle",
    "MasterKey",
    "NoCandidateError",
    "NonceWords",
    "PlanOnlyError",
    "ResourceLimitError",
    "build_plan",
    "complexity_ledger",
    "cube_sum",
    "cube_sum_parallel",
    "exhaustive_completion",
    "filtration_count",
    "init_oracle",
    "make_spec",
    "permutation",
    "recover_bits",
    "run_attack",
    "simulate_subset_identification",
    "validate_spec",
]
