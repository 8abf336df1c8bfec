"""Continued fractions ``[a_1, a_2, ...]`` with a realized prefix and an optional tail rule.

>>> cf = parse_angle("1,1,1,3,2,(1)*")
>>> cf.quotients(7)
[1, 1, 1, 3, 2, 1, 1]
>>> convergents(cf, 5).q
(1, 2, 3, 11, 25)
>>> format_angle(sigma_shift(cf))
'1,1,3,2,(1)*'
"""
from __future__ import annotations

import re
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from flint import arb, ctx, fmpq

from .errors import InsufficientPrefix, ThetaRecurError, PrecisionExhausted


class ContinuedFraction:
    """Partial quotients a_1, a_2, ... of an angle in (0, 1).

    ``tail`` extends the realized prefix: an int (constant tail), a tuple
    (periodic tail) or a callable ``n -> a_n`` taking the absolute index
    n > len(prefix).  Callables must be pure; results are memoized.
    """

    __slots__ = ("_prefix", "_kind", "_data", "_offset", "bounded_by", "_memo")

    def __init__(self, quotients: Sequence[int], tail=None, bounded_by: Optional[int] = None):
        prefix = tuple(int(a) for a in quotients)
        if tail is None:
            kind, data = None, None
        elif isinstance(tail, int):
            kind, data = "const", int(tail)
        elif isinstance(tail, (tuple, list)):
            if not tail:
                raise ValueError("empty periodic tail")
            kind, data = "periodic", tuple(int(a) for a in tail)
        elif callable(tail):
            kind, data = "callback", (tail, len(prefix))
        else:
            raise TypeError(f"unsupported tail rule {tail!r}")
        self._init(prefix, kind, data, 0, bounded_by)
        for a in prefix:
            self._check(a)
        if kind == "const":
            self._check(data)
        elif kind == "periodic":
            for a in data:
                self._check(a)

    def _init(self, prefix, kind, data, offset, bounded_by):
        self._prefix = prefix
        self._kind = kind
        self._data = data
        self._offset = offset
        self.bounded_by = bounded_by
        self._memo = {}

    @classmethod
    def _raw(cls, prefix, kind, data, offset, bounded_by):
        obj = cls.__new__(cls)
        obj._init(prefix, kind, data, offset, bounded_by)
        return obj

    def _check(self, a):
        if a < 1:
            raise ValueError(f"partial quotients must be positive, got {a}")
        if self.bounded_by is not None and a > self.bounded_by:
            raise ValueError(f"partial quotient {a} exceeds bound {self.bounded_by}")

    @property
    def prefix(self):
        return self._prefix

    @property
    def is_finite(self):
        return self._kind is None

    @property
    def tail_kind(self):
        return self._kind

    def _tail(self, t):
        # t-th tail term (t >= 1), i.e. a_{len(prefix)+t}
        j = t - 1 + self._offset
        if self._kind == "const":
            return self._data
        if self._kind == "periodic":
            return self._data[j % len(self._data)]
        if j not in self._memo:
            fn, n0 = self._data
            a = int(fn(n0 + j + 1))
            self._check(a)
            self._memo[j] = a
        return self._memo[j]

    def a(self, n: int) -> int:
        if n < 1:
            raise IndexError("partial quotients are indexed from 1")
        N = len(self._prefix)
        if n <= N:
            return self._prefix[n - 1]
        if self._kind is None:
            raise InsufficientPrefix(f"a_{n} requested but only {N} quotients are realized", depth=N)
        return self._tail(n - N)

    def has(self, n: int) -> bool:
        return n <= len(self._prefix) or self._kind is not None

    def quotients(self, n: int) -> list:
        return [self.a(i) for i in range(1, n + 1)]

    def available(self) -> Optional[int]:
        """Number of producible quotients, None when unbounded."""
        return len(self._prefix) if self._kind is None else None

    def truncate(self, n: int) -> "ContinuedFraction":
        return ContinuedFraction(self.quotients(n), bounded_by=self.bounded_by)

    def key(self):
        data = self._data if self._kind != "callback" else (id(self._data[0]), self._data[1])
        return (self._prefix, self._kind, data, self._offset)

    def __eq__(self, other):
        return isinstance(other, ContinuedFraction) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"ContinuedFraction({format_angle(self)!r})"


def sigma_shift(cf: ContinuedFraction) -> ContinuedFraction:
    """The shift: [a_1-1, a_2, ...] if a_1 > 1, else [a_2, a_3, ...].

    >>> format_angle(sigma_shift(parse_angle("3,2,(1)*")))
    '2,2,(1)*'
    >>> format_angle(sigma_shift(parse_angle("1,3,2,(1)*")))
    '3,2,(1)*'
    """
    prefix, offset = cf._prefix, cf._offset
    if not prefix:
        if cf._kind is None:
            raise InsufficientPrefix("cannot shift an empty continued fraction")
        prefix, offset = (cf._tail(1),), offset + 1
    if prefix[0] > 1:
        prefix = (prefix[0] - 1,) + prefix[1:]
    else:
        prefix = prefix[1:]
    return ContinuedFraction._raw(prefix, cf._kind, cf._data, offset, cf.bounded_by)


@dataclass(frozen=True)
class Convergents:
    """p_n, q_n for n = base, ..., base + len(q) - 1."""
    p: tuple
    q: tuple
    base: int

    def q_at(self, n):
        return self.q[n - self.base]

    def p_at(self, n):
        return self.p[n - self.base]

    @property
    def last(self):
        return self.base + len(self.q) - 1

    def indices(self):
        return range(self.base, self.last + 1)


def _pq(cf, n):
    # p_{-1}, p_0, ..., p_n and q likewise, as plain lists offset by one
    p, q = [1, 0], [0, 1]
    for i in range(1, n + 1):
        a = cf.a(i)
        p.append(a * p[-1] + p[-2])
        q.append(a * q[-1] + q[-2])
    return p, q


def convergents(cf: ContinuedFraction, depth: int, include_q0: Optional[bool] = None) -> Convergents:
    """Convergent tables of length ``depth``.

    By default q_0 = 1 is included exactly when a_1 > 1; pass ``include_q0``
    to force either indexing.

    >>> convergents(parse_angle("1,1"), 2)
    Convergents(p=(1, 1), q=(1, 2), base=1)
    >>> convergents(parse_angle("3,2"), 2).q
    (1, 3)
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    if include_q0 is None:
        include_q0 = cf.a(1) > 1
    base = 0 if include_q0 else 1
    last = base + depth - 1
    avail = cf.available()
    if avail is not None and last > avail:
        raise InsufficientPrefix(f"{depth} convergents need a_{last} but only {avail} quotients exist", depth=avail)
    p, q = _pq(cf, last)
    return Convergents(tuple(p[base + 1:]), tuple(q[base + 1:]), base)


class QTable:
    """Lazily grown q_n (and p_n) with q_{-1} = 0, q_0 = 1.  Internal helper."""

    def __init__(self, cf: ContinuedFraction):
        self.cf = cf
        self._p = [1, 0]
        self._q = [0, 1]

    def _grow(self, n):
        while len(self._q) - 2 < n:
            i = len(self._q) - 1
            a = self.cf.a(i)
            self._p.append(a * self._p[-1] + self._p[-2])
            self._q.append(a * self._q[-1] + self._q[-2])

    def q(self, n):
        self._grow(n)
        return self._q[n + 1]

    def p(self, n):
        self._grow(n)
        return self._p[n + 1]

    def level_of(self, k):
        """Largest n >= 1 with q_n <= k (k >= 1)."""
        n = 1
        while self.q(n + 1) <= k:
            n += 1
        return n

    def max_level(self):
        """Deepest index whose q is computable, None if unbounded."""
        avail = self.cf.available()
        return avail


def _trunc_bound(q, N, cf):
    # |theta - p_N/q_N| <= 1/(q_N q_{N+1}); with a_{N+1} unknown use q_N + q_{N-1}
    qn, qprev = q[N + 1], q[N]
    qnext = cf.a(N + 1) * qn + qprev if cf.has(N + 1) else qn + qprev
    return Fraction(1, qn * qnext)


def angle_value(cf: ContinuedFraction, precision_bits: int, depth: Optional[int] = None) -> arb:
    """A ball certified to contain the angle.

    With ``depth`` given the fraction is truncated there and the truncation
    bound is added to the radius.  Without it the depth is chosen so that the
    total radius is at most about 2^-precision_bits.

    >>> with ctx.workprec(64):
    ...     v = angle_value(parse_angle("1"), 64, depth=1)
    >>> v.contains(1), v.contains(fmpq(1, 2)), v.contains(fmpq(1, 3))
    (True, True, False)
    """
    target = Fraction(1, 2 ** precision_bits)
    if depth is None:
        avail = cf.available()
        depth = 1
        while True:
            p, q = _pq(cf, depth)
            if _trunc_bound(q, depth, cf) <= target:
                break
            if avail is not None and depth >= avail:
                achievable = _trunc_bound(q, depth, cf)
                raise PrecisionExhausted(
                    f"angle known only to radius {float(achievable):.3g} at depth {depth}",
                    achievable=achievable)
            depth += 1
    p, q = _pq(cf, depth)
    err = _trunc_bound(q, depth, cf)
    with ctx.workprec(precision_bits + 16):
        mid = arb(fmpq(p[depth + 1], q[depth + 1]))
        return mid + arb(0, fmpq(err.numerator, err.denominator))


@dataclass(frozen=True)
class AngleClass:
    admissible: bool
    bounded: bool
    max_quotient: int
    horizon: int
    records: tuple          # ((N_k, a_{N_k}), ...)
    gap_condition: bool
    violations: tuple = field(default=())   # ((N_k, N_{k+1}), ...)


def gap_exceeds(gap: int, a: int, tau: Fraction) -> bool:
    """Exact test of gap > 2^((5 + tau) * a) for rational tau.

    >>> gap_exceeds(2 ** 12 + 1, 2, Fraction(1)), gap_exceeds(2 ** 12, 2, Fraction(1))
    (True, False)
    """
    tau = Fraction(tau)
    e = (5 + tau) * a
    if gap <= 0:
        return False
    # gap > 2^(num/den)  <=>  gap^den > 2^num
    return gap ** e.denominator > 2 ** e.numerator if e >= 0 else True


def classify_angle(cf: ContinuedFraction, tau, horizon: int) -> AngleClass:
    """Admissibility, boundedness and the record-gap growth condition up to ``horizon``.

    Records are the positions N with a_N strictly bigger than every earlier
    quotient (position 1 included).
    """
    tau = Fraction(tau)
    qs = cf.quotients(horizon)
    admissible = len(qs) >= 3 and qs[0] == qs[1] == qs[2] == 1
    records = []
    best = 0
    for i, a in enumerate(qs, start=1):
        if a > best:
            records.append((i, a))
            best = a
    bad = []
    for (n0, _), (n1, a1) in zip(records, records[1:]):
        if not gap_exceeds(n1 - n0, a1, tau):
            bad.append((n0, n1))
    bounded = cf.bounded_by is not None or cf.tail_kind in (None, "const", "periodic")
    return AngleClass(admissible, bounded, max(qs), horizon, tuple(records), not bad, tuple(bad))


def is_admissible(cf: ContinuedFraction) -> bool:
    return cf.has(3) and cf.a(1) == cf.a(2) == cf.a(3) == 1


def parse_angle(text: str) -> ContinuedFraction:
    """Parse "1,1,1,3,2,(1)*" style specs; "(1,2)*" gives a periodic tail."""
    s = text.strip().strip("[]")
    if not s:
        raise ThetaRecurError("empty angle spec")
    tail = None
    m = re.search(r"\(([^()]*)\)\*\s*$", s)
    if m:
        body = [t for t in m.group(1).replace(" ", "").split(",") if t]
        if not body:
            raise ThetaRecurError(f"bad tail in {text!r}")
        vals = [int(t) for t in body]
        tail = vals[0] if len(vals) == 1 else tuple(vals)
        s = s[:m.start()].rstrip(", ")
    try:
        prefix = [int(t) for t in s.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise ThetaRecurError(f"bad angle spec {text!r}") from exc
    if not prefix and tail is None:
        raise ThetaRecurError(f"bad angle spec {text!r}")
    return ContinuedFraction(prefix, tail)


def format_angle(cf: ContinuedFraction) -> str:
    parts = [str(a) for a in cf.prefix]
    kind = cf.tail_kind
    if kind == "const":
        parts.append(f"({cf._data})*")
    elif kind == "periodic":
        k = cf._offset % len(cf._data)
        per = cf._data[k:] + cf._data[:k]
        parts.append("(" + ",".join(map(str, per)) + ")*")
    elif kind == "callback":
        parts.append("...")
    return ",".join(parts)


@lru_cache(maxsize=128)
def qtable(cf: ContinuedFraction) -> QTable:
    """Shared lazily grown convergent table for ``cf``."""
    return QTable(cf)
