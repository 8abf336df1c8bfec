"""Combinatorial circle renormalization and Sturmian recoding.

A renormalization state tracks the angle, the sign s, on which side of the
unimodal part the monotone branch sits, and the index b of the first best
return.  One step shifts the angle by sigma and flips s exactly when
q_{b+1} = 2.

>>> from thetarecur.cf import parse_angle
>>> st = RenormState.initial(parse_angle("1,1,1,3,2,(1)*"))
>>> [(format_angle(t.theta), t.s) for t in trajectory(st, 3)]
[('1,1,1,3,2,(1)*', '+'), ('1,1,3,2,(1)*', '-'), ('1,3,2,(1)*', '+'), ('3,2,(1)*', '+')]
>>> str(recode_word(BinaryWord.parse("1011010110110")))
'10110101'
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from flint import arb, ctx

from .balls import PrecisionPolicy
from .cf import ContinuedFraction, angle_value, format_angle, qtable, sigma_shift
from .errors import InsufficientPrefix, InvalidWord, PrecisionExhausted

LEFT, RIGHT = "left", "right"


def first_return_base(cf: ContinuedFraction) -> int:
    return 0 if cf.a(1) > 1 else 1


@dataclass(frozen=True)
class RenormState:
    theta: ContinuedFraction
    s: str
    j_side: str
    b: int

    @classmethod
    def initial(cls, theta: ContinuedFraction, s: str = "+") -> "RenormState":
        if s not in "+-" or len(s) != 1:
            raise ValueError("s must be '+' or '-'")
        b = first_return_base(theta)
        return cls(theta, s, LEFT if _q_next(theta, b) == 2 else RIGHT, b)

    @property
    def q_next(self) -> int:
        """q_{b+1}, the second best return time."""
        return _q_next(self.theta, self.b)

    def return_times(self, count: int) -> list:
        """q_b, q_{b+1}, ... (count values)."""
        qt = qtable(self.theta)
        return [qt.q(self.b + i) for i in range(count)]

    def to_json(self, count: int = 5):
        return {"theta": format_angle(self.theta), "s": self.s, "j_side": self.j_side,
                "b": self.b, "q_prefix": self.return_times(count)}


def _q_next(cf, b):
    return cf.a(1) if b == 0 else cf.a(1) * cf.a(2) + 1


def renorm_step(state: RenormState) -> RenormState:
    try:
        flip = state.q_next == 2
        theta = sigma_shift(state.theta)
        theta.a(2)
    except InsufficientPrefix as exc:
        raise InsufficientPrefix("renormalization needs two more realized quotients") from exc
    s = ("-" if state.s == "+" else "+") if flip else state.s
    return RenormState.initial(theta, s)


def trajectory(state: RenormState, steps: int) -> list:
    out = [state]
    for _ in range(steps):
        out.append(renorm_step(out[-1]))
    return out


# -- Sturmian words --------------------------------------------------------

@dataclass(frozen=True)
class BinaryWord:
    """Finite prefix of a rotation sequence; starts with its non-isolated symbol."""
    bits: tuple

    def __post_init__(self):
        if not self.bits:
            raise InvalidWord("empty word")
        if any(b not in (0, 1) for b in self.bits):
            raise InvalidWord("bits must be 0 or 1")
        iso = self.isolated
        if any(x == y == iso for x, y in zip(self.bits, self.bits[1:])):
            raise InvalidWord(f"symbol {iso} is supposed to be isolated but repeats")

    @classmethod
    def parse(cls, text: str) -> "BinaryWord":
        return cls(tuple(int(ch) for ch in text.strip()))

    @property
    def isolated(self) -> int:
        return 1 - self.bits[0]

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join(map(str, self.bits))


def sturmian_word(theta: ContinuedFraction, length: int, precision: int = 128,
                  policy: Optional[PrecisionPolicy] = None) -> BinaryWord:
    """s_n = 1 iff R^n(theta) lies in (-theta, 0] mod 1, n = 0..length-1,
    i.e. s_n = floor((n+2) theta) - floor((n+1) theta)."""
    if length < 2:
        raise ValueError("length must be at least 2")
    policy = policy or PrecisionPolicy(start_bits=precision)
    for bits in policy.ladder(precision):
        out = _sturmian(theta, length, bits)
        if out is not None:
            return BinaryWord(out)
    raise PrecisionExhausted(f"rotation orbit not certified within {policy.cap_bits} bits")


def _sturmian(theta, length, bits):
    work = bits + length.bit_length() + 8
    with ctx.workprec(work):
        th = angle_value(theta, bits)
        floors = []
        for m in range(1, length + 2):
            x = m * th
            if x.contains_integer():
                return None
            floors.append(int(x.floor().unique_fmpz()))
    return tuple(b - a for a, b in zip(floors, floors[1:]))


def recode_word(w: BinaryWord, rule: str = "derived") -> BinaryWord:
    """Compress a Sturmian prefix by one renormalization step.

    Each pair made of the leading symbol followed by the isolated symbol
    becomes 1, each remaining leading symbol becomes 0; a trailing leading
    symbol whose partner may have been cut off is dropped.  With
    ``rule="literal"`` the pair is replaced by the leading symbol and every
    other symbol is kept.
    """
    if not isinstance(w, BinaryWord):
        w = BinaryWord(tuple(w))
    if len(set(w.bits)) == 1:
        raise InvalidWord("constant word has no isolated symbol")
    non, iso = w.bits[0], w.isolated
    b = w.bits
    out = []
    i = 0
    while i < len(b) - 1:
        if b[i] == non and b[i + 1] == iso:
            out.append(1 if rule == "derived" else non)
            i += 2
        else:
            out.append(0 if rule == "derived" else b[i])
            i += 1
    if not out:
        raise InvalidWord("word too short to recode")
    return BinaryWord(tuple(out))


def common_prefix(u, v) -> int:
    n = 0
    for x, y in zip(u.bits, v.bits):
        if x != y:
            break
        n += 1
    return n
