"""``ascon-cube`` command line: attacks, symbolic checks, 7-round planning, rationality tests.

Exit codes: 0 success, 1 mismatch, 2 usage error, 3 resource limit.
Reports written with ``--out`` are JSON with sorted keys and no timing data,
so an identical configuration always yields identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from ascon_cube.anf.expected import LEDGER_128, LEDGER_128A
from ascon_cube.anf.verify import verify_all
from ascon_cube.attack import run_attack
from ascon_cube.core import Flavor, MasterKey
from ascon_cube.errors import ConsistencyError, NoCandidateError, PlanOnlyError, ResourceLimitError
from ascon_cube.planner import build_plan, emit_cube_files
from ascon_cube.rationality import bit_frequencies, monomial_presence

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

LEDGER_TOLERANCE = 0.01
PUBLISHED_LEDGERS = {Flavor.ASCON128: LEDGER_128, Flavor.ASCON128A: LEDGER_128A}

# Acceptance thresholds for the rationality tests.
NONZERO_CUBE_FRACTION = 0.8
ACTIVE_BIT_FREQUENCY = 0.2
BALANCED_RANGE = (0.3, 0.7)

DEFAULTS = {
    "flavor": "128",
    "rounds": None,
    "key": None,
    "key_seed": None,
    "seed": 0,
    "threads": 1,
    "t": None,
    "budget_log2": 30,
    "emit_cubes": None,
    "out": None,
    "degree_pairs": 20,
    "test": "all",
    "trials": 1000,
    "keys": None,
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    flavor: str = "128"
    rounds: int | None = None
    key: str | None = None
    key_seed: int | None = None
    seed: int = 0
    threads: int = 1
    t: list[int] | None = None
    budget_log2: int = 30
    emit_cubes: str | None = None
    out: str | None = None
    degree_pairs: int = 20
    test: str = "all"
    trials: int = 1000
    keys: int | None = None

    def header(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k not in ("out", "emit_cubes")}

    def master_key(self) -> MasterKey:
        if self.key is not None and self.key_seed is not None:
            raise UsageError("give either --key or --key-seed, not both")
        if self.key is not None:
            try:
                return MasterKey.from_hex(self.key)
            except ValueError as exc:
                raise UsageError(f"bad --key: {exc}") from None
        if self.key_seed is None:
            raise UsageError("a random key needs --key-seed (or pass --key)")
        return MasterKey.random(np.random.default_rng(self.key_seed))


def parse_positions(text: str | list | None) -> list[int] | None:
    if text is None or isinstance(text, list):
        return text
    if text == "all":
        return list(range(64))
    try:
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--t expects comma-separated integers, got {text!r}") from None
    if not out or any(not 0 <= t < 64 for t in out):
        raise UsageError("--t positions must lie in 0..63")
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--flavor", choices=["128", "128a"])
    p.add_argument("--seed", type=int, help="seed for every random choice of the run")
    p.add_argument("--threads", type=int, help="cube-sum worker count")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--config", help="JSON file with any of the flag values (flags win)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ascon-cube", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attack", help="5/6-round conditional cube key recovery")
    _common(p)
    p.add_argument("--rounds", type=int)
    p.add_argument("--key", help="k0||k1 as 32 hex characters")
    p.add_argument("--key-seed", type=int, help="draw the key from this seed")
    p.add_argument("--t", help="key positions, e.g. 0,1 or all (default all)")
    p.add_argument("--budget-log2", type=int, help="largest exhaustive completion, log2 candidates")

    p = sub.add_parser("verify-anf", help="rebuild the 7-round symbolic objects and compare")
    _common(p)
    p.add_argument("--degree-pairs", type=int, help="random (key, i) pairs for the degree check")

    p = sub.add_parser("plan7", help="7-round subset plan and complexity ledger")
    _common(p)
    p.add_argument("--emit-cubes", help="directory for one CubeSpec file per cube")

    p = sub.add_parser("tests", help="nonzero cube-sum statistics")
    _common(p)
    p.add_argument("--rounds", type=int)
    p.add_argument("--test", choices=["1", "2", "all"])
    p.add_argument("--trials", type=int, help="random cubes for test 1")
    p.add_argument("--keys", type=int, help="keys for test 2 (default 200, or 20 at 6 rounds)")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_values: dict = {}
    if getattr(args, "config", None):
        try:
            file_values = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_values, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(file_values) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config fields: {sorted(unknown)}")
    values = {}
    for name, default in DEFAULTS.items():
        cli_value = getattr(args, name, None)
        values[name] = cli_value if cli_value is not None else file_values.get(name, default)
    values["t"] = parse_positions(values["t"])
    if values["threads"] < 1:
        raise UsageError("--threads must be at least 1")
    return RunConfig(command=args.command, **values)


def write_report(config: RunConfig, body: dict) -> None:
    if config.out is None:
        return
    doc = {"config": config.header(), "report": body}
    Path(config.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def cmd_attack(config: RunConfig) -> int:
    rounds = config.rounds
    if rounds is None:
        raise UsageError("attack needs --rounds 5 or 6")
    if rounds >= 7:
        raise PlanOnlyError(f"{rounds} rounds is plan-only: use the plan7 command")
    if rounds not in (5, 6):
        raise UsageError("attack supports --rounds 5 or 6")
    key = config.master_key()
    report = run_attack(
        key,
        rounds,
        config.flavor,
        ts=config.t,
        workers=config.threads,
        seed=config.seed,
        budget_log2=config.budget_log2,
        free_seed=config.seed,
    )
    print(report.text())
    write_report(config, report.to_dict())
    return EXIT_OK if report.success else EXIT_MISMATCH


def cmd_verify_anf(config: RunConfig) -> int:
    report = verify_all(Flavor.parse(config.flavor), degree_pairs=config.degree_pairs, seed=config.seed)
    print(report.text())
    write_report(
        config,
        {
            "ok": report.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "open_question": c.open_question, "detail": c.detail}
                for c in report.checks
            ],
        },
    )
    return EXIT_OK if report.ok else EXIT_MISMATCH


def ledger_comparison(flavor: Flavor, rounded: dict) -> list[tuple[str, float, float, bool]]:
    rows = []
    for name, want in PUBLISHED_LEDGERS[flavor].items():
        got = rounded[name]
        rows.append((name, got, want, abs(got - want) <= LEDGER_TOLERANCE + 1e-9))
    return rows


def cmd_plan7(config: RunConfig) -> int:
    flavor = Flavor.parse(config.flavor)
    plan = build_plan(flavor)
    ledger = plan.ledger
    lines = [f"Ascon-{flavor.value} 7-round subset plan"]
    for s in plan.subsets:
        conds = ", ".join(c.to_text() for c in s.conditions)
        lines.append(f"  {s.name:<10} case {int(s.case)}  {conds:<24} 2^{s.test_cost_log2:.2f}")
    for i, reason in plan.dropped:
        lines.append(f"  dropped i={i}: {reason}")
    for n, chain in enumerate(plan.ki_chains):
        lines.append(f"  KI_{n} ({len(chain)}): {list(chain)}")
    lines.append(f"  cubes in plan: {plan.cube_count}")
    comparison = ledger_comparison(flavor, ledger.rounded())
    for name, value in ledger.rounded().items():
        lines.append(f"  {name:<13} 2^{value:.2f}")
    for name, got, want, ok in comparison:
        lines.append(f"ledger {name}: derived {got:.2f}, published {want:.2f}: {'PASS' if ok else 'FAIL'}")
    written = None
    if config.emit_cubes:
        written = emit_cube_files(plan, config.emit_cubes)
        lines.append(f"wrote {written} cube files to {config.emit_cubes}")
    print("\n".join(lines))
    body = plan.to_dict()
    body["published_comparison"] = [
        {"name": n, "derived": g, "published": w, "pass": ok} for n, g, w, ok in comparison
    ]
    if written is not None:
        body["cube_files_written"] = written
    write_report(config, body)
    return EXIT_OK if all(ok for *_, ok in comparison) else EXIT_MISMATCH


def cmd_tests(config: RunConfig) -> int:
    rounds = config.rounds or 5
    base_vars = 16 if rounds == 5 else 32
    results: dict = {}
    ok = True
    if config.test in ("1", "all"):
        r1 = monomial_presence(config.trials, base_vars, rounds, config.seed, config.flavor, config.threads)
        passed = r1.fraction >= NONZERO_CUBE_FRACTION
        ok &= passed
        print(f"test 1: {r1.nonzero}/{r1.trials} cubes of dimension {r1.dimension} "
              f"have a nonzero sum after {rounds} rounds: {'PASS' if passed else 'FAIL'}")
        results["test1"] = r1.to_dict() | {"pass": passed}
    if config.test in ("2", "all"):
        keys = config.keys or (200 if rounds == 5 else 20)
        r2 = bit_frequencies(keys, base_vars, rounds, config.seed + 1, config.flavor, config.threads)
        if rounds == 5:
            passed = bool(r2.always_zero()) and bool(r2.above(ACTIVE_BIT_FREQUENCY))
            claim = (f"{len(r2.always_zero())} always-zero bits, "
                     f"{len(r2.above(ACTIVE_BIT_FREQUENCY))} bits above {ACTIVE_BIT_FREQUENCY}")
        else:
            passed = r2.within(*BALANCED_RANGE)
            claim = f"all frequencies within {list(BALANCED_RANGE)}"
        ok &= passed
        print(r2.histogram())
        print(f"test 2: {keys} keys, {claim}: {'PASS' if passed else 'FAIL'}")
        results["test2"] = r2.to_dict() | {"pass": passed}
    write_report(config, results)
    return EXIT_OK if ok else EXIT_MISMATCH


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "attack": cmd_attack,
    "verify-anf": cmd_verify_anf,
    "plan7": cmd_plan7,
    "tests": cmd_tests,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        config = resolve_config(args)
        return COMMANDS[config.command](config)
    except (UsageError, PlanOnlyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (NoCandidateError, ConsistencyError) as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
