"""Published reference objects for the 65-variable cube, as parseable templates.

Templates are written with the symbolic position ``i``, ``n(j)`` for
``S0[4][j]`` and ``IV(j)`` for IV bits; :func:`ascon_cube.anf.poly.parse`
instantiates them.  They assume ``S0[2] = k1`` with no round constant, so
derived polynomials go through ``normalize_round_constant`` before comparing.
"""

from __future__ import annotations

from dataclasses import dataclass

KEY_TERMS_I1 = (
    "k0(i+1)*k1(i+1)+k0(i+1)+k0(i+4)*k1(i+4)+k0(i+4)+k0(i+26)*k1(i+26)+k0(i+26)"
    "+k1(i+1)+k1(i+4)+k1(i+26)+IV(i+1)+IV(i+4)+IV(i+26)"
)

# S1[2][i+1] as printed; the last term is known to disagree with the algebra.
STATE_X2_I1 = (
    "v(i)*v64+k0(i)+k0(i+1)+k0(i+59)+k1(i)+k1(i+1)+k1(i+59)"
    "+n(i+1)*v(i+1)+n(i+1)+n(i+59)*v(i+59)+n(i+59)+v(i+64)"
)
# What must be added to the printed S1[2][i+1] to reach the derived one.
STATE_X2_I1_CORRECTION = "v(i+64)+v64+1"


@dataclass(frozen=True)
class StateTemplate:
    """Printed ANFs of S1[1..3][i+1] for one slot layout."""

    name: str
    aux: tuple
    control: tuple
    x1: str
    x2: str
    x3: str
    # Positions whose IV bits the printed x3 silently assumes to be 0.
    x3_assumes_iv_zero: tuple = ()


STATE_TEMPLATES = (
    StateTemplate(
        "no auxiliary variables",
        (),
        (),
        "(k0(i+1)+k1(i+1)+1)*v(i+1)+(k0(i+4)+k1(i+4)+1)*v(i+4)+(k0(i+26)+k1(i+26)+1)*v(i+26)"
        "+n(i+1)+n(i+4)+n(i+26)+" + KEY_TERMS_I1,
        STATE_X2_I1,
        "(IV(i+1)+1)*v(i+1)+(IV(i+48)+1)*v(i+48)+(IV(i+55)+1)*v(i+55)"
        "+(IV(i+1)+1)*n(i+1)+(IV(i+48)+1)*n(i+48)+(IV(i+55)+1)*n(i+55)"
        "+k0(i+1)+k0(i+48)+k0(i+55)+k1(i+1)+k1(i+48)+k1(i+55)+IV(i+1)+IV(i+48)+IV(i+55)",
    ),
    StateTemplate(
        "auxiliary variables at i+1, i+48, i+55",
        (1, 48, 55),
        (),
        "(k0(i+1)+k1(i+1))*v(i+1)+(k0(i+4)+k1(i+4)+1)*v(i+4)+(k0(i+26)+k1(i+26)+1)*v(i+26)"
        "+n(i+4)+n(i+26)+" + KEY_TERMS_I1,
        STATE_X2_I1,
        "k0(i+1)+k0(i+48)+k0(i+55)+k1(i+1)+k1(i+48)+k1(i+55)+IV(i+1)+IV(i+48)+IV(i+55)",
    ),
    StateTemplate(
        "auxiliary variables and control at i+4",
        (1, 6, 47, 48, 53, 54, 55, 60),
        (4,),
        "(k0(i+1)+k1(i+1))*v(i+1)+(k0(i+4)+k1(i+4))*v(i+4)+(k0(i+26)+k1(i+26)+1)*v(i+26)"
        "+n(i+26)+" + KEY_TERMS_I1,
        STATE_X2_I1,
        "k0(i+1)+k0(i+48)+k0(i+55)+k1(i+1)+k1(i+48)+k1(i+55)",
        x3_assumes_iv_zero=(1, 48, 55),
    ),
)


@dataclass(frozen=True)
class TableRow:
    sbox_offset: int
    partner_offset: int
    coefficients: tuple  # templates; "0" marks a zeroed row


def _rows(spec):
    return tuple(TableRow(s, p, tuple(c)) for s, p, c in spec)


def _key(off: int, plus_one: bool = True) -> str:
    return f"k0(i+{off})+k1(i+{off})" + ("+1" if plus_one else "")


NO_AUX_TABLE = _rows(
    [
        (1, 1, [_key(1), "k0(i+1)+k1(i+1)+IV(i+1)"]),
        (1, 4, [_key(4)]),
        (1, 26, [_key(26)]),
        (1, 48, ["IV(i+48)+1"]),
        (1, 55, ["IV(i+55)+1"]),
        (0, 3, [_key(3)]),
        (0, 25, [_key(25)]),
        (0, 47, ["IV(i+47)+1"]),
        (0, 54, ["IV(i+54)+1"]),
        (6, 6, [_key(6), "k0(i+6)+k1(i+6)+IV(i+6)"]),
        (6, 9, [_key(9)]),
        (6, 31, [_key(31)]),
        (6, 53, ["IV(i+53)+1"]),
        (6, 61, ["IV(i+60)+1"]),
    ]
)

AUX_TABLE = _rows(
    [
        (1, 1, [_key(1, False)]),
        (1, 4, [_key(4)]),
        (1, 26, [_key(26)]),
        (1, 48, ["0"]),
        (1, 55, ["0"]),
        (0, 3, [_key(3)]),
        (0, 25, [_key(25)]),
        (0, 47, ["0"]),
        (0, 54, ["0"]),
        (6, 6, [_key(6, False)]),
        (6, 9, [_key(9)]),
        (6, 31, [_key(31)]),
        (6, 53, ["0"]),
        (6, 61, ["0"]),
    ]
)

CONTROL4_TABLE = tuple(
    TableRow(1, 4, (_key(4, False),)) if (r.sbox_offset, r.partner_offset) == (1, 4) else r for r in AUX_TABLE
)

# Printed row (sbox offset, partner offset) whose partner disagrees with its auxiliary slot.
SUSPECT_ROW = (6, 61)
SUSPECT_ROW_SLOT = 60

AUX_SLOTS = (1, 48, 55, 47, 54, 6, 53, 60)
CONTROL_OFFSETS = (3, 4, 9, 25, 26, 31)

# (offset, value) lists: b(i+offset) = value.
BASE_SYSTEM = ((1, 0), (4, 1), (26, 1), (3, 1), (25, 1), (6, 0), (9, 1), (31, 1))
CONTROL4_SYSTEM = ((1, 0), (4, 0), (26, 1), (3, 1), (25, 1), (6, 0), (9, 1), (31, 1))
# Offsets that take a free value per control combination; the others are fixed.
CASE1_FREE = (4, 26, 3, 25, 9, 31)
CASE2_VIA_I1_FREE = (1, 4, 26, 3, 25, 9, 31)
CASE2_VIA_I6_FREE = (4, 26, 3, 25, 6, 9, 31)
CASE1_FIXED = ((1, 0), (6, 0))
CASE2_VIA_I1_FIXED = ((6, 0),)
CASE2_VIA_I6_FIXED = ((1, 0),)

# Absolute b-bit positions of the one-bit conditions b(j)=0.
ONE_BIT_VIA_I1 = (5, 14, 25, 26, 34, 35)
ONE_BIT_VIA_I6 = (59, 4, 15, 16, 24, 25)
# Positions of v64 for the eleven one-condition subsets.
PRIMED_POSITIONS = (63, 8, 19, 20, 28, 29, 58, 3, 14, 15, 23)
PRIMED_EXCLUDED_EXTRA = 30

CHAINS_128 = (
    (5, 14, 25, 26, 34, 35, 59, 4, 15, 16, 24),
    (40, 45, 50, 55, 60, 1, 6, 11),
    (31, 36, 41, 46, 51, 56, 61, 2, 7, 12, 17, 22, 27, 32, 37, 42,
     47, 52, 57, 62, 3, 8, 13, 18, 23, 28, 33, 38, 43, 48, 53, 58, 63),
    (39, 44, 49, 54),
)
CHAINS_128A = (
    (4, 12, 24, 25, 32, 53, 61, 13, 10, 17),
    (30, 35, 40, 45, 50, 55, 60, 1, 6, 11, 16, 21, 26, 31, 36, 41, 46, 51, 56),
    (2, 7),
    (9, 14, 19),
    (15, 20),
    (28, 33, 38, 43, 48),
    (29, 34, 39, 44, 49, 54, 59, 0, 5),
    (37, 42, 47, 52, 57, 62, 3, 8),
    (58, 63),
)

FILTRATION_COUNTS = {8: 55, 33: 9227465, 4: 8, 19: 10946, 2: 3, 3: 5, 5: 13, 9: 89}

LEDGER_128 = {"cube_testing": 77.21, "filter": 33.1, "remaining": 103.92, "worst_case": 103.92, "weak_key": 77.00}
LEDGER_128A = {"remaining": 103.45, "worst_case": 103.45}
