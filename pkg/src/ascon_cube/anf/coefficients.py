"""Cubic-term coefficients of the 65-variable cube after the second S-box layer.

Layout for position ``i``: ``S0[3][j] = v_j`` for every j, ``S0[4][i] = v64``,
and ``S0[4][i+a] = v_{i+a}`` (tied to ``S0[3][i+a]``) for every auxiliary or
control offset ``a``.  After one round the only quadratic monomial is
``v_i*v64``, and it lives in ``S1[2]`` at columns i, i+1, i+6.  In the
second S-box layer ``x2`` is multiplied only by ``x1`` and ``x3``, so the
cubic terms ``v_i*v64*v_j`` come from the linear cube part of ``S1[1]`` and
``S1[3]`` at those three columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

from ascon_cube.anf.poly import (
    CUBE_MASK,
    KEY_MASK,
    Polynomial,
    VarId,
    VarKind,
    cube,
    k1,
)
from ascon_cube.anf.symbolic import (
    advance_symbolic,
    linear_half,
    linear_sources,
    max_degree,
    sbox_half,
    symbolic_init,
)
from ascon_cube.core import CipherParams, Flavor, MasterKey, NonceWords, get_bit

HIGH_VAR = 64
SBOX_OFFSETS = (1, 0, 6)
AUX_OFFSETS = (1, 6, 47, 48, 53, 54, 55, 60)
CONTROL_MENU = (3, 4, 9, 25, 26, 31)
# Bits of x2 hit by the first round constant; the effective S0[2][j] is k1(j)+1 there.
FIRST_CONSTANT_BITS = (56, 57, 58, 59)


def seven_round_slots(i: int, aux: Iterable[int] = (), control: Iterable[int] = ()) -> list[tuple[int, int, int]]:
    """``(word, bit, var)`` cube slots for position ``i`` (offsets are mod 64)."""
    if not 0 <= i < 64:
        raise ValueError(f"position {i} out of range")
    slots = [(3, j, j) for j in range(64)]
    slots.append((4, i, HIGH_VAR))
    tied = {(i + a) % 64 for a in aux} | {(i + a) % 64 for a in control}
    if i in tied:
        raise ValueError("offset 0 is the v64 slot and cannot be tied")
    slots.extend((4, j, j) for j in sorted(tied))
    return slots


@lru_cache(maxsize=512)
def _round_one(i: int, aux: frozenset, control: frozenset, flavor: Flavor):
    """S1 at the three round-two S-box columns of ``i`` (other bits ``None``)."""
    state = symbolic_init(flavor, seven_round_slots(i, aux, control))
    columns = degree_columns(i)
    return linear_half(sbox_half(state, 0, columns=linear_sources(columns)), columns)


def _linear_cube_vars(p: Polynomial) -> set[int]:
    out = set()
    for t in p.terms:
        c = t & CUBE_MASK
        if c and c & (c - 1) == 0:
            out.add(VarId.from_bit(c.bit_length() - 1).index)
    return out


def _cubic_groups(p: Polynomial, pair: int) -> dict[int, set[int]]:
    """Cube monomials ``pair*v_j`` of ``p`` mapped to their non-cube coefficient terms."""
    groups: dict[int, set[int]] = {}
    for t in p.terms:
        c = t & CUBE_MASK
        if c & pair == pair and c.bit_count() == 3:
            groups.setdefault(c, set()).symmetric_difference_update((t & ~CUBE_MASK,))
    return groups


@dataclass(frozen=True)
class CoefficientEntry:
    sbox_offset: int
    partner_offset: int
    word_coefficients: tuple  # ((word, Polynomial), ...) for the five output words

    @property
    def coefficients(self) -> list[Polynomial]:
        """Distinct nonzero coefficients across output words, in word order."""
        seen: list[Polynomial] = []
        for _, c in self.word_coefficients:
            if c and c not in seen:
                seen.append(c)
        return seen

    def term_text(self, i: int) -> str:
        return f"v{i}*v64*v{(i + self.partner_offset) % 64}"


@dataclass(frozen=True)
class CoefficientTable:
    i: int
    aux: frozenset
    control: frozenset
    flavor: Flavor
    entries: tuple

    def entry(self, sbox_offset: int, partner_offset: int) -> CoefficientEntry:
        for e in self.entries:
            if e.sbox_offset == sbox_offset and e.partner_offset == partner_offset:
                return e
        raise KeyError((sbox_offset, partner_offset))

    def coefficients_at(self, sbox_offset: int, partner_offset: int) -> list[Polynomial]:
        """Distinct nonzero coefficients; empty when the term cannot occur."""
        try:
            return self.entry(sbox_offset, partner_offset).coefficients
        except KeyError:
            return []

    def partners(self, sbox_offset: int) -> list[int]:
        return [e.partner_offset for e in self.entries if e.sbox_offset == sbox_offset]

    def to_text(self) -> str:
        lines = [
            f"position {self.i} flavor {self.flavor.value} aux {sorted(self.aux)} control {sorted(self.control)}"
        ]
        for e in self.entries:
            coeffs = e.coefficients
            text = " | ".join(c.to_text() for c in coeffs) if coeffs else "0"
            lines.append(f"  sbox i+{e.sbox_offset}  {e.term_text(self.i)}  {text}")
        return "\n".join(lines)


def extract_cubic_coefficients(
    i: int,
    aux: Iterable[int] = (),
    control: Iterable[int] = (),
    flavor: Flavor | str = Flavor.ASCON128,
) -> CoefficientTable:
    """Coefficients of every ``v_i*v64*v_j`` in S-boxes i, i+1, i+6 of round two.

    Rows are the partners ``j`` whose variable enters ``S1[1]`` or ``S1[3]`` of
    that column linearly, either in this layout or in the layout without tied
    slots, so zeroed rows stay visible.
    """
    flavor = Flavor.parse(flavor)
    return _extract(i, frozenset(a % 64 for a in aux), frozenset(a % 64 for a in control), flavor)


@lru_cache(maxsize=4096)
def _extract(i: int, aux_set: frozenset, control_set: frozenset, flavor: Flavor) -> CoefficientTable:
    s1 = _round_one(i, aux_set, control_set, flavor)
    base = _round_one(i, frozenset(), frozenset(), flavor)
    columns = [(i + off) % 64 for off in SBOX_OFFSETS]
    half = sbox_half(s1, 1, columns=columns)
    high = cube(HIGH_VAR).bit
    low = cube(i).bit
    entries = []
    for off, col in zip(SBOX_OFFSETS, columns):
        partners: set[int] = set()
        for state in (s1, base):
            for w in (1, 3):
                partners |= _linear_cube_vars(state[w][col])
        partners -= {i, HIGH_VAR}
        pair = (1 << high) | (1 << low)
        groups = [_cubic_groups(half[w][col], pair) for w in range(5)]
        for j in sorted(partners, key=lambda j: (j - i) % 64):
            m = pair | (1 << cube(j).bit)
            coeffs = tuple((w, Polynomial(frozenset(groups[w].get(m, ())))) for w in range(5))
            entries.append(CoefficientEntry(off, (j - i) % 64, coeffs))
    return CoefficientTable(i, aux_set, control_set, flavor, tuple(entries))


def normalize_round_constant(poly: Polynomial) -> Polynomial:
    """Substitute ``k1(j) -> k1(j)+1`` on the first-constant bits (an involution).

    Maps a derived polynomial onto the convention where ``S0[2] = k1`` with no
    constant added, and back.
    """
    for j in FIRST_CONSTANT_BITS:
        poly = poly.translate(k1(j))
    return poly


@dataclass(frozen=True, order=True)
class AffineEquation:
    """``sum(b(j) for j in positions) = rhs`` with ``b(j) = k0(j)+k1(j)``."""

    positions: tuple
    rhs: int

    def holds(self, key: MasterKey) -> bool:
        acc = 0
        for j in self.positions:
            acc ^= get_bit(key.k0 ^ key.k1, j)
        return acc == self.rhs

    def to_text(self) -> str:
        lhs = "+".join(f"b({j})" for j in self.positions) or "0"
        return f"{lhs}={self.rhs}"


def equation_from_coefficient(coeff: Polynomial) -> AffineEquation:
    """The condition ``coeff = 0`` written over b-bits; rejects anything else."""
    if coeff.support() & ~KEY_MASK:
        raise ValueError(f"coefficient {coeff.to_text()} involves non-key variables")
    if coeff.degree() > 1:
        raise ValueError(f"coefficient {coeff.to_text()} is not affine in the key")
    k0_pos = {v.index for v in coeff.variables() if v.kind == VarKind.K0}
    k1_pos = {v.index for v in coeff.variables() if v.kind == VarKind.K1}
    if k0_pos != k1_pos:
        raise ValueError(f"coefficient {coeff.to_text()} is not a sum of k0(j)+k1(j) pairs")
    return AffineEquation(tuple(sorted(k0_pos)), coeff.constant_term())


@dataclass(frozen=True)
class KeyConditionSystem:
    equations: tuple
    feasible: bool
    notes: tuple = field(default=())

    def holds(self, key: MasterKey) -> bool:
        return self.feasible and all(e.holds(key) for e in self.equations)

    def as_dict(self) -> dict[int, int]:
        """``{position: value}`` for a system of single-position equations."""
        out = {}
        for e in self.equations:
            if len(e.positions) != 1:
                raise ValueError(f"equation {e.to_text()} has more than one position")
            out[e.positions[0]] = e.rhs
        return out

    def to_text(self) -> str:
        if not self.feasible:
            return "infeasible: " + "; ".join(self.notes)
        return ", ".join(e.to_text() for e in self.equations)


def _consistent(equations: Iterable[AffineEquation]) -> bool:
    rows: dict[int, int] = {}  # pivot bit -> row (bit 64 holds rhs)
    for e in equations:
        row = sum(1 << j for j in e.positions) | (e.rhs << 64)
        for pivot, prow in rows.items():
            if row >> pivot & 1:
                row ^= prow
        lhs = row & ((1 << 64) - 1)
        if not lhs:
            if row >> 64:
                return False
            continue
        pivot = lhs.bit_length() - 1
        for p in list(rows):
            if rows[p] >> pivot & 1:
                rows[p] ^= row
        rows[pivot] = row
    return True


def derive_key_conditions(table: CoefficientTable) -> KeyConditionSystem:
    """Conditions on b-bits that zero every coefficient in ``table``.

    A constant-1 coefficient or contradictory pair makes the system infeasible.
    """
    eqs: list[AffineEquation] = []
    notes: list[str] = []
    for e in table.entries:
        for c in e.coefficients:
            eq = equation_from_coefficient(c)
            if not eq.positions:
                notes.append(f"{e.term_text(table.i)} has constant coefficient 1")
            elif eq not in eqs:
                eqs.append(eq)
    eqs.sort()
    feasible = not notes and _consistent(eqs)
    if not notes and not feasible:
        notes.append("contradictory equations")
    return KeyConditionSystem(tuple(eqs), feasible, tuple(notes))


def max_cube_degree(
    key: MasterKey,
    i: int,
    aux: Iterable[int] = AUX_OFFSETS,
    control: Iterable[int] = (),
    rounds: int = 2,
    flavor: Flavor | str = Flavor.ASCON128,
    nonce: NonceWords | None = None,
    columns: Iterable[int] | None = None,
) -> int:
    """Highest cube-variable degree over the state after ``rounds`` rounds.

    Key and non-cube nonce bits are concrete (nonce defaults to zero).  With
    ``columns`` the last S-box layer is evaluated only there; the caller is
    responsible for those columns holding every non-quadratic output.
    """
    if rounds not in (1, 2):
        raise ValueError("rounds must be 1 or 2")
    state = symbolic_init(
        flavor, seven_round_slots(i, aux, control), key=key, nonce=nonce or NonceWords(0, 0)
    )
    for r in range(rounds - 1):
        state = advance_symbolic(state, r)
    half = sbox_half(state, rounds - 1, columns=columns)
    if columns is None:
        return max_degree(linear_half(half))
    return max_degree(half)


def degree_columns(i: int) -> tuple[int, ...]:
    """Round-two S-boxes that can receive the quadratic ``v_i*v64``."""
    return tuple((i + off) % 64 for off in SBOX_OFFSETS)


def iv_bit(flavor: Flavor | str, j: int) -> int:
    return get_bit(CipherParams.for_flavor(flavor).iv, j % 64)
