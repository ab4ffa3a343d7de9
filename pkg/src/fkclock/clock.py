"""Clock-register encodings and compiled level operators.

Levels fill the register exactly: 2**n_a levels, 2**n_a - 1 hops. The bit
string returned by :func:`encode` is most-significant-bit first, and clock
qubit ``k`` carries bit position ``k`` of that string.
"""

from __future__ import annotations

from dataclasses import dataclass

from .pauli import PauliString, PauliSum

ENCODINGS = ("binary", "gray")


@dataclass(frozen=True)
class ClockSpec:
    """Auxiliary register layout: qubit count and level encoding."""

    n_a: int
    encoding: str = "gray"

    def __post_init__(self):
        if self.n_a < 1:
            raise ValueError(f"n_a must be >= 1, got {self.n_a}")
        if self.encoding not in ENCODINGS:
            raise ValueError(f"encoding must be one of {ENCODINGS}, got {self.encoding!r}")

    @property
    def levels(self) -> int:
        return 1 << self.n_a

    @property
    def hops(self) -> int:
        return self.levels - 1


def encode(level: int, spec: ClockSpec) -> str:
    """Bit string of a clock level: plain binary or reflected binary code."""
    if not 0 <= level < spec.levels:
        raise ValueError(f"level {level} out of range [0, {spec.levels})")
    code = level ^ (level >> 1) if spec.encoding == "gray" else level
    return format(code, f"0{spec.n_a}b")


def code_index(level: int, spec: ClockSpec) -> int:
    """Integer value of the encoded bit string (basis index in the register)."""
    return int(encode(level, spec), 2)


def _equal_bit_factor(bit: str) -> PauliSum:
    # |x><x| = (I + (-1)^x Z) / 2
    sign = 1.0 if bit == "0" else -1.0
    return PauliSum(1, {PauliString("I"): 0.5, PauliString("Z"): 0.5 * sign})


def _flip_bit_factor(bit_from: str) -> PauliSum:
    # |~x><x| = (X -+ iY) / 2: minus for x=0, plus for x=1. Fixed by the dense
    # identity |1><0| = [[0,0],[1,0]], not by any printed sign convention.
    sign = -1j if bit_from == "0" else 1j
    return PauliSum(1, {PauliString("X"): 0.5, PauliString("Y"): 0.5 * sign})


def projector(level: int, spec: ClockSpec) -> PauliSum:
    """|b(level)><b(level)| on the clock register as an I/Z Pauli sum."""
    bits = encode(level, spec)
    out = _equal_bit_factor(bits[0])
    for b in bits[1:]:
        out = out.tensor(_equal_bit_factor(b))
    return out


def hop(level: int, spec: ClockSpec) -> PauliSum:
    """|b(level+1)><b(level)| on the clock register.

    Gray encoding puts the single X/Y factor on the one differing bit; binary
    encodings may flip several bits at once. Either way the expansion carries
    2**n_a terms.
    """
    if not 0 <= level < spec.hops:
        raise ValueError(f"hop {level} has no successor (levels={spec.levels})")
    src = encode(level, spec)
    dst = encode(level + 1, spec)
    factors = []
    for bit_from, bit_to in zip(src, dst):
        if bit_from == bit_to:
            factors.append(_equal_bit_factor(bit_from))
        else:
            factors.append(_flip_bit_factor(bit_from))
    out = factors[0]
    for f in factors[1:]:
        out = out.tensor(f)
    return out


def encode_table(spec: ClockSpec) -> list[tuple[int, str]]:
    return [(i, encode(i, spec)) for i in range(spec.levels)]
