"""Thin helpers over python-flint ``arb`` balls.

``arb`` is the certified real type used throughout (a midpoint with an error
radius).  Comparisons between balls are only trusted when they are certain.

>>> from flint import arb, ctx
>>> with ctx.workprec(64):
...     sign(arb(-3)), sign(arb(0)), sign(arb(0, 1))
(-1, 0, None)
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from flint import arb, ctx, fmpq

__all__ = ["arb", "ctx", "fmpq", "PrecisionPolicy", "sign", "less", "fmt", "to_fmpq",
           "from_fraction", "mid_fraction", "abs_ball", "frac_part", "dist_to_int"]


@dataclass(frozen=True)
class PrecisionPolicy:
    """Start bits, doubling on indeterminacy, hard cap."""
    start_bits: int = 128
    cap_bits: int = 8192

    def ladder(self, start=None):
        b = start or self.start_bits
        while b <= self.cap_bits:
            yield b
            b *= 2


def sign(x: arb):
    """+1, -1, 0 for an exact zero, None when the ball straddles 0."""
    if x.is_zero():
        return 0
    if x > 0:
        return 1
    if x < 0:
        return -1
    return None


def less(x: arb, y: arb):
    """True/False when x < y is certain either way, None otherwise."""
    if x < y:
        return True
    if x >= y:
        return False
    return None


def to_fmpq(v) -> fmpq:
    v = Fraction(v)
    return fmpq(v.numerator, v.denominator)


def from_fraction(v) -> arb:
    return arb(to_fmpq(v))


def mid_fraction(x: arb) -> Fraction:
    """Exact dyadic midpoint."""
    m, e = x.mid().man_exp()
    m, e = int(m), int(e)
    return Fraction(m * 2 ** e) if e >= 0 else Fraction(m, 2 ** -e)


def abs_ball(x: arb) -> arb:
    return abs(x)


def frac_part(x: arb) -> arb:
    """x mod 1 as a ball in [0, 1); the ball may still straddle an integer."""
    n = x.mid().floor()
    return x - n


def dist_to_int(x: arb) -> arb:
    """Ball enclosing |x - n| for the integer n nearest to the midpoint of x."""
    n = (x.mid() + arb(fmpq(1, 2))).floor()
    return abs(x - n)


def fmt(x, digits: int = 20) -> str:
    """Decimal 'mid±rad' string whose printed interval encloses the ball.

    >>> from flint import arb, ctx
    >>> with ctx.workprec(64):
    ...     fmt(arb(fmpq(1, 3)), 6)
    '0.333333±3.34e-7'
    >>> fmt(Fraction(-1, 2))
    '-0.5±0'
    """
    if isinstance(x, (Fraction, int)):
        x = from_fraction(x)
    if not x.is_finite():
        return "nan±inf"
    text = x.mid().str(digits, radius=False)
    if "." in text and "e" not in text:
        text = text.rstrip("0").rstrip(".")
    shown = Fraction(text)
    err = abs(mid_fraction(x) - shown) + mid_fraction(x.rad())
    if err == 0:
        return f"{text}±0"
    return f"{text}±{_round_up(err)}"


def _round_up(v: Fraction, sig: int = 3) -> str:
    """Decimal with sig significant digits that is >= v > 0."""
    e = len(str(v.numerator)) - len(str(v.denominator))
    while Fraction(10) ** e <= v:
        e += 1
    while Fraction(10) ** (e - 1) > v:
        e -= 1
    scale = Fraction(10) ** (sig - e)
    m = -((-v * scale).numerator // (v * scale).denominator)
    if len(str(m)) > sig:
        m, e = m // 10, e + 1
    return f"{m / 10 ** (sig - 1):.{sig - 1}f}e{e - 1}"
