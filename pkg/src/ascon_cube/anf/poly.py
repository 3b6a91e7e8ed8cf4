"""Sparse GF(2) polynomials in algebraic normal form.

A monomial is a Python int used as a bit set over a fixed universe of 321
variables; a polynomial is a frozenset of such ints.  Addition is symmetric
difference and x*x = x falls out of OR-ing bit sets.  Bit order equals the
canonical (kind, index) order of :class:`VarId`.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from ascon_cube.errors import ResourceLimitError

DEFAULT_MONOMIAL_LIMIT = 2_000_000


class VarKind(enum.IntEnum):
    K0 = 0
    K1 = 1
    NONCE3 = 2
    NONCE4 = 3
    CUBE = 4
    IVCONST = 5


_BASE = {VarKind.K0: 0, VarKind.K1: 64, VarKind.NONCE3: 128, VarKind.NONCE4: 192, VarKind.CUBE: 256}
_SIZE = {VarKind.K0: 64, VarKind.K1: 64, VarKind.NONCE3: 64, VarKind.NONCE4: 64, VarKind.CUBE: 65}
N_VARS = 321

KEY_MASK = (1 << 128) - 1
NONCE_MASK = ((1 << 128) - 1) << 128
CUBE_MASK = ((1 << 65) - 1) << 256


@dataclass(frozen=True, order=True)
class VarId:
    kind: VarKind
    index: int

    def __post_init__(self):
        kind = VarKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is VarKind.IVCONST:
            if not 0 <= self.index < 64:
                raise ValueError(f"IV index out of range: {self.index}")
            return
        if not 0 <= self.index < _SIZE[kind]:
            raise ValueError(f"{kind.name} index out of range: {self.index}")

    @property
    def bit(self) -> int:
        if self.kind is VarKind.IVCONST:
            raise ValueError("IV constants are folded and have no variable slot")
        return _BASE[self.kind] + self.index

    @classmethod
    def from_bit(cls, bit: int) -> "VarId":
        for kind in (VarKind.CUBE, VarKind.NONCE4, VarKind.NONCE3, VarKind.K1, VarKind.K0):
            if bit >= _BASE[kind]:
                return cls(kind, bit - _BASE[kind])
        raise ValueError(bit)

    @property
    def name(self) -> str:
        return {
            VarKind.K0: f"k0({self.index})",
            VarKind.K1: f"k1({self.index})",
            VarKind.NONCE3: f"n3({self.index})",
            VarKind.NONCE4: f"n4({self.index})",
            VarKind.CUBE: f"v{self.index}",
            VarKind.IVCONST: f"IV({self.index})",
        }[self.kind]

    def __str__(self) -> str:
        return self.name


def k0(j: int) -> VarId:
    return VarId(VarKind.K0, j % 64)


def k1(j: int) -> VarId:
    return VarId(VarKind.K1, j % 64)


def cube(j: int) -> VarId:
    return VarId(VarKind.CUBE, j)


def _bits(m: int):
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


def monomial_of(vars_: Iterable[VarId]) -> int:
    m = 0
    for v in vars_:
        m |= 1 << v.bit
    return m


def monomial_vars(m: int) -> list[VarId]:
    return [VarId.from_bit(b) for b in _bits(m)]


class Polynomial:
    """Immutable GF(2) polynomial; ``p + q`` is XOR, ``p * q`` is product."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Iterable[int] = ()):
        self.terms = terms if isinstance(terms, frozenset) else frozenset(terms)
        self._hash = None

    # constructors
    @classmethod
    def zero(cls) -> "Polynomial":
        return _ZERO

    @classmethod
    def one(cls) -> "Polynomial":
        return _ONE

    @classmethod
    def const(cls, c: int) -> "Polynomial":
        return _ONE if c & 1 else _ZERO

    @classmethod
    def var(cls, v: VarId) -> "Polynomial":
        return cls(frozenset((1 << v.bit,)))

    @classmethod
    def from_monomials(cls, monomials: Iterable[Iterable[VarId]]) -> "Polynomial":
        acc: set[int] = set()
        for mono in monomials:
            acc ^= {monomial_of(mono)}
        return cls(frozenset(acc))

    # ring operations
    def __add__(self, other: "Polynomial | int") -> "Polynomial":
        if isinstance(other, int):
            other = Polynomial.const(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        return Polynomial(self.terms ^ other.terms)

    __radd__ = __add__
    __xor__ = __add__

    def mul(self, other: "Polynomial", limit: int = DEFAULT_MONOMIAL_LIMIT) -> "Polynomial":
        a, b = self.terms, other.terms
        if not a or not b:
            return _ZERO
        if len(a) == 1 and 0 in a:
            return other
        if len(b) == 1 and 0 in b:
            return self
        if len(a) * len(b) > 4 * limit:
            raise ResourceLimitError(f"product of {len(a)} x {len(b)} monomials exceeds limit {limit}")
        acc: set[int] = set()
        toggle_add, toggle_rm = acc.add, acc.remove
        for x in a:
            for y in b:
                m = x | y
                if m in acc:
                    toggle_rm(m)
                else:
                    toggle_add(m)
        if len(acc) > limit:
            raise ResourceLimitError(f"polynomial with {len(acc)} monomials exceeds limit {limit}")
        return Polynomial(frozenset(acc))

    def __mul__(self, other: "Polynomial | int") -> "Polynomial":
        if isinstance(other, int):
            return self if other & 1 else _ZERO
        return self.mul(other)

    __rmul__ = __mul__
    __and__ = __mul__

    # comparisons
    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = Polynomial.const(other)
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.terms)
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"Polynomial({self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()

    # queries
    def is_constant(self) -> bool:
        return all(m == 0 for m in self.terms)

    def constant_term(self) -> int:
        return int(0 in self.terms)

    def degree(self, mask: int | None = None) -> int:
        """Max monomial degree, counting only variables inside ``mask`` if given."""
        if not self.terms:
            return -1
        if mask is None:
            return max(m.bit_count() for m in self.terms)
        return max((m & mask).bit_count() for m in self.terms)

    def support(self) -> int:
        s = 0
        for m in self.terms:
            s |= m
        return s

    def variables(self) -> list[VarId]:
        return monomial_vars(self.support())

    def monomials(self) -> list[list[VarId]]:
        return [monomial_vars(m) for m in sorted(self.terms, key=_sort_key)]

    def coefficient_of(self, monomial: int | Iterable[VarId]) -> "Polynomial":
        """c such that self = monomial*c + (terms not divisible by monomial).

        The split is taken over the variables of ``monomial`` versus the rest:
        a term contributes iff its restriction to those variables equals the
        monomial exactly.
        """
        m = monomial if isinstance(monomial, int) else monomial_of(monomial)
        return self._coefficient(m)

    def _coefficient(self, m: int, split: int | None = None) -> "Polynomial":
        split = m if split is None else split
        acc: set[int] = set()
        for t in self.terms:
            if t & split == m:
                acc ^= {t & ~split}
        return Polynomial(frozenset(acc))

    def coefficient_over(self, m: int, split: int) -> "Polynomial":
        """Coefficient of ``m`` when the variables in ``split`` are the 'cube' side."""
        return self._coefficient(m, split)

    def restrict(self, mask: int) -> "Polynomial":
        """Terms whose variables all lie inside ``mask``."""
        return Polynomial(frozenset(t for t in self.terms if t & ~mask == 0))

    def substitute(self, var: VarId, replacement: "Polynomial", limit: int = DEFAULT_MONOMIAL_LIMIT) -> "Polynomial":
        vb = 1 << var.bit
        if replacement.support() & vb:
            raise ValueError(f"cannot substitute {var.name} by a polynomial containing it")
        without = frozenset(t for t in self.terms if not t & vb)
        with_var = Polynomial(frozenset(t & ~vb for t in self.terms if t & vb))
        return Polynomial(without) + with_var.mul(replacement, limit)

    def translate(self, var: VarId) -> "Polynomial":
        """Replace ``var`` by ``var + 1``."""
        vb = 1 << var.bit
        acc = set(self.terms)
        for t in self.terms:
            if t & vb:
                acc ^= {t & ~vb}
        return Polynomial(frozenset(acc))

    def substitute_many(self, mapping: Mapping[VarId, "Polynomial"]) -> "Polynomial":
        out = self
        for v, r in mapping.items():
            out = out.substitute(v, r)
        return out

    def assign(self, values: Mapping[int, int]) -> "Polynomial":
        """Fix variables (by bit slot) to constants 0/1."""
        ones = 0
        zeros = 0
        for b, val in values.items():
            if val & 1:
                ones |= 1 << b
            else:
                zeros |= 1 << b
        acc: set[int] = set()
        for t in self.terms:
            if t & zeros:
                continue
            acc ^= {t & ~ones}
        return Polynomial(frozenset(acc))

    def evaluate(self, assignment: Mapping[int, int], width_mask: int = 1) -> int:
        """Evaluate with every variable slot mapped to a (bitsliced) int.

        Pass plain 0/1 values for a single point, or ints holding N parallel
        assignments with ``width_mask = 2**N - 1``.  Missing slots count as 0.
        """
        total = 0
        for t in self.terms:
            val = width_mask
            for b in _bits(t):
                val &= assignment.get(b, 0)
                if not val:
                    break
            total ^= val
        return total

    # text format
    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=_sort_key):
            parts.append("1" if m == 0 else "*".join(VarId.from_bit(b).name for b in _bits(m)))
        return "+".join(parts)

    @classmethod
    def parse(cls, text: str, i: int | None = None, iv: int | None = None) -> "Polynomial":
        return parse(text, i=i, iv=iv)


def _sort_key(m: int):
    return (-m.bit_count(), list(_bits(m))) if m else (1, [])


_ZERO = Polynomial(frozenset())
_ONE = Polynomial(frozenset((0,)))


_FACTOR = re.compile(
    r"""^(?:
        (?P<kv>k0|k1|n3|n4|n|IV)\((?P<idx>[^)]*)\)
      | v(?:_\{(?P<vb>[^}]*)\}|\((?P<vp>[^)]*)\)|(?P<vn>\d+))
      | (?P<c>[01])
    )$""",
    re.VERBOSE,
)


def _index(expr: str, i: int | None, wrap: bool = True) -> int:
    expr = expr.replace(" ", "")
    if "i" in expr:
        if i is None:
            raise ValueError(f"template index {expr!r} needs a value for i")
        expr = expr.replace("i", str(i))
    if not re.fullmatch(r"[0-9+\-]+", expr):
        raise ValueError(f"bad index expression {expr!r}")
    value = sum(int(tok) for tok in re.findall(r"[+-]?\d+", expr))
    return value % 64 if wrap else value


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for pos, ch in enumerate(text):
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:pos])
            start = pos + 1
    parts.append(text[start:])
    return parts


def parse(text: str, i: int | None = None, iv: int | None = None) -> Polynomial:
    """Parse '+'-separated monomials of '*'-separated factors.

    A factor may itself be a parenthesised polynomial, e.g. ``(k0(3)+1)*v3``.

    Factors: ``k0(j) k1(j) n3(j) n4(j) n(j)`` (``n`` = ``n4``), ``vJ``,
    ``v_{J}``, ``v(J)``, ``IV(j)``, ``0``, ``1``.  Index expressions may use
    ``i`` (e.g. ``k0(i+26)``), reduced mod 64 except for a literal ``v64``.
    ``IV(j)`` is folded to a constant using ``iv``.
    """
    text = text.replace(" ", "").replace("\n", "")
    if not text:
        raise ValueError("empty polynomial text")
    acc = _ZERO
    for mono_text in _split_top(text, "+"):
        mono = _ONE
        for factor in _split_top(mono_text, "*"):
            if factor.startswith("(") and factor.endswith(")"):
                mono = mono * parse(factor[1:-1], i=i, iv=iv)
                continue
            mt = _FACTOR.match(factor)
            if not mt:
                raise ValueError(f"cannot parse factor {factor!r}")
            if mt.group("c") is not None:
                mono = mono * int(mt.group("c"))
                continue
            if mt.group("kv"):
                kind, j = mt.group("kv"), _index(mt.group("idx"), i)
                if kind == "IV":
                    if iv is None:
                        raise ValueError("IV(j) needs an IV word to fold")
                    mono = mono * ((iv >> (63 - j)) & 1)
                    continue
                vk = {"k0": VarKind.K0, "k1": VarKind.K1, "n3": VarKind.NONCE3,
                      "n4": VarKind.NONCE4, "n": VarKind.NONCE4}[kind]
                mono = mono * Polynomial.var(VarId(vk, j))
                continue
            raw = mt.group("vb") or mt.group("vp") or mt.group("vn")
            literal = _index(raw, i, wrap=False)
            j = literal if ("i" not in raw and literal == 64) else literal % 64
            mono = mono * Polynomial.var(cube(j))
        acc = acc + mono
    return acc


def b_poly(j: int) -> Polynomial:
    """k0(j) + k1(j)."""
    return Polynomial.var(k0(j)) + Polynomial.var(k1(j))
