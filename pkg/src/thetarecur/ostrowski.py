"""Ostrowski numeration attached to an angle.

Integers are written as k = sum gamma_n q_n with 0 <= gamma_n <= a_{n+1} and
gamma_n = a_{n+1} forcing gamma_{n-1} = 0.  Reals in [-theta, 1-theta) are
written as sums of the signed lengths theta_n = q_n theta - p_n under the
same digit rules, with gamma_0 <= a_1 - 1 when position 0 is used.

Digit position 0 (the q_0 = 1 term) is used when a_1 > 1 or when
``appendix=True`` is passed; otherwise digits start at position 1.

>>> from thetarecur.cf import parse_angle
>>> fib = parse_angle("1,(1)*")
>>> w = encode_int(7, fib)
>>> str(w), w.support()
('[0,1,0,1]', ((2, 1), (4, 1)))
>>> str(increment(w))
'[0,0,0,0,1]'
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from flint import arb, ctx

from .balls import less
from .cf import ContinuedFraction, angle_value, qtable
from .errors import InsufficientPrefix, InvalidWord, OutOfRange, PrecisionExhausted

INT, REAL = "int", "real"


def default_base(cf: ContinuedFraction, appendix: Optional[bool] = None) -> int:
    if appendix is None:
        appendix = cf.a(1) > 1
    return 0 if appendix else 1


def digit_cap(cf: ContinuedFraction, n: int) -> int:
    return cf.a(1) - 1 if n == 0 else cf.a(n + 1)


@dataclass(frozen=True)
class OstrowskiWord:
    """Digits gamma_base, gamma_base+1, ... (least significant first)."""
    digits: tuple
    cf: ContinuedFraction
    kind: str = INT
    base: int = 1

    def __post_init__(self):
        if self.base not in (0, 1):
            raise InvalidWord("digit base must be 0 or 1")
        if self.kind == INT:
            d = list(self.digits)
            while d and d[-1] == 0:
                d.pop()
            object.__setattr__(self, "digits", tuple(d))
        self.validate()

    def digit(self, n: int) -> int:
        i = n - self.base
        return self.digits[i] if 0 <= i < len(self.digits) else 0

    @property
    def top(self) -> int:
        """Highest stored position (base - 1 for the empty word)."""
        return self.base + len(self.digits) - 1

    def support(self):
        return tuple((self.base + i, g) for i, g in enumerate(self.digits) if g)

    def validate(self):
        prev = 0
        for i, g in enumerate(self.digits):
            n = self.base + i
            if g < 0:
                raise InvalidWord("negative digit")
            if not self.cf.has(n + 1):
                # cap unknown past the realized quotients
                prev = g
                continue
            if g > digit_cap(self.cf, n):
                raise InvalidWord(f"digit {g} at position {n} exceeds its bound {digit_cap(self.cf, n)}")
            if n >= 1 and g == self.cf.a(n + 1) and prev:
                raise InvalidWord(f"digit at position {n} is maximal but position {n - 1} is nonzero")
            prev = g
        return self

    def __str__(self):
        return "[" + ",".join(str(g) for g in self.digits) + "]"

    def __int__(self):
        return decode_int(self)


def parse_word(text: str, cf: ContinuedFraction, kind=INT, base: Optional[int] = None) -> OstrowskiWord:
    body = text.strip().strip("[]").replace(" ", "")
    digits = tuple(int(t) for t in body.split(",") if t) if body else ()
    return OstrowskiWord(digits, cf, kind, default_base(cf) if base is None else base)


def _max_int(cf, top):
    # smallest integer not representable with digits at positions <= top
    qt = qtable(cf)
    if cf.has(top + 1):
        return qt.q(top + 1)
    return qt.q(top) + qt.q(top - 1)


def encode_int(k: int, cf: ContinuedFraction, appendix: Optional[bool] = None) -> OstrowskiWord:
    """Greedy expansion of k >= 0."""
    if k < 0:
        raise OutOfRange("only nonnegative integers have expansions")
    base = default_base(cf, appendix)
    qt = qtable(cf)
    if k == 0:
        return OstrowskiWord((), cf, INT, base)
    avail = cf.available()
    top = base
    while (avail is None or top + 1 <= avail) and qt.q(top + 1) <= k:
        top += 1
    if avail is not None and k >= _max_int(cf, top):
        raise OutOfRange(f"{k} needs more than the {avail} realized quotients")
    digits = [0] * (top - base + 1)
    r = k
    for n in range(top, base - 1, -1):
        g, r = divmod(r, qt.q(n))
        digits[n - base] = g
    return OstrowskiWord(tuple(digits), cf, INT, base)


def decode_int(w: OstrowskiWord) -> int:
    qt = qtable(w.cf)
    return sum(g * qt.q(n) for n, g in w.support())


def numeration_cmp(u: OstrowskiWord, v: OstrowskiWord) -> int:
    """Order by the most significant differing digit."""
    for n in range(max(u.top, v.top), min(u.base, v.base) - 1, -1):
        a, b = u.digit(n), v.digit(n)
        if a != b:
            return -1 if a < b else 1
    return 0


def increment(w: OstrowskiWord) -> OstrowskiWord:
    """Add one by carrying through the identity q_{n+1} = a_{n+1} q_n + q_{n-1}."""
    if w.kind != INT:
        raise InvalidWord("increment applies to integer words")
    try:
        return _increment(w)
    except InsufficientPrefix as exc:
        raise OutOfRange("increment overflows the realized depth") from exc


def _increment(w):
    cf, b = w.cf, w.base
    qt = qtable(cf)
    d = dict((n, g) for n, g in w.support())
    d[b] = d.get(b, 0) + 1
    n = b
    while True:
        g = d.get(n, 0)
        if n == 0 and g > cf.a(1) - 1:
            # a_1 q_0 = q_1
            d[0] = g - cf.a(1)
            d[1] = d.get(1, 0) + 1
        elif n >= 1 and g > cf.a(n + 1):
            # only reachable when q_n = q_{n-1}, i.e. n = 1 and a_1 = 1
            assert qt.q(n) == qt.q(n - 1)
            d[n] = g - cf.a(n + 1) - 1
            d[n + 1] = d.get(n + 1, 0) + 1
        elif n >= 1 and g == cf.a(n + 1) and d.get(n - 1, 0) > 0:
            # q_{n-1} + a_{n+1} q_n = q_{n+1}
            d[n - 1] -= 1
            d[n] = 0
            d[n + 1] = d.get(n + 1, 0) + 1
        elif n > max(d):
            break
        n += 1
    top = max(k for k, g in d.items() if g)
    digits = tuple(d.get(i, 0) for i in range(b, top + 1))
    return OstrowskiWord(digits, cf, INT, b)


def tail_bound(cf: ContinuedFraction, depth: int) -> Fraction:
    """Exact bound 1/q_{depth+1} >= |theta_depth| on the digits past ``depth``."""
    return Fraction(1, qtable(cf).q(depth + 1))


def theta_lengths(cf: ContinuedFraction, depth: int, bits: int) -> list:
    """Balls for theta_n = q_n theta - p_n, n = 0..depth (theta_0 = theta)."""
    qt = qtable(cf)
    work = bits + 2 * qt.q(depth + 1).bit_length() + 32
    with ctx.workprec(work):
        th = angle_value(cf, work)
        return [qt.q(n) * th - qt.p(n) for n in range(depth + 1)]


def _tail_interval(th, n, restricted):
    # endpoints of the sums reachable by digits at positions > n; when
    # gamma_n > 0 the next digit is capped at a_{n+2} - 1
    e_near = -th[n] - th[n + 1] if restricted else -th[n]
    return e_near, -th[n + 1]


def encode_real(x: arb, cf: ContinuedFraction, depth: int, appendix: Optional[bool] = None,
                bits: int = 256) -> OstrowskiWord:
    """Greedy real expansion to position ``depth`` (largest admissible digit first)."""
    base = default_base(cf, appendix)
    with ctx.workprec(bits + 64):
        th = theta_lengths(cf, depth + 1, bits)
        lo, hi = -th[0], 1 - th[0]
        if x < lo or x >= hi:
            raise OutOfRange("x lies outside [-theta, 1-theta)")
        if not (x >= lo and x < hi):
            raise PrecisionExhausted("cannot certify that x lies in [-theta, 1-theta)")
        r = x
        prev = 0
        digits = []
        for n in range(base, depth + 1):
            cap = digit_cap(cf, n)
            if n >= 1 and prev:
                cap = min(cap, cf.a(n + 1) - 1)
            chosen = None
            for g in range(cap, -1, -1):
                rr = r - g * th[n]
                e1, e2 = _tail_interval(th, n, g > 0)
                a, b = (e1, e2) if e1 < e2 else (e2, e1)
                below, above = less(rr, a), less(b, rr)
                if below or above:
                    continue
                if below is None or above is None:
                    raise PrecisionExhausted(f"digit at position {n} is ball-ambiguous", position=n)
                chosen = (g, rr)
                break
            if chosen is None:
                raise PrecisionExhausted(f"no digit fits at position {n}", position=n)
            g, r = chosen
            digits.append(g)
            prev = g
    return OstrowskiWord(tuple(digits), cf, REAL, base)


def decode_real(w: OstrowskiWord, depth: Optional[int] = None, precision: int = 256) -> arb:
    """Partial sum to ``depth`` widened by the tail bound 1/q_{depth+1}."""
    if depth is None:
        depth = w.top
    th = theta_lengths(w.cf, depth, precision)
    t = tail_bound(w.cf, depth)
    with ctx.workprec(precision + 64):
        s = arb(0)
        for n, g in w.support():
            if n <= depth:
                s += g * th[n]
        return s + arb(0, t.numerator) / t.denominator
