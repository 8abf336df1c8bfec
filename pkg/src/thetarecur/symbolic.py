"""Signs, kneading data and the order of the critical orbit of a theta-recurrent map.

Everything here is combinatorial: orbit points are named by their index k
(or its Ostrowski word) and never by coordinates.

>>> from thetarecur.cf import parse_angle
>>> fib = parse_angle("1,(1)*")
>>> [sign_of(k, fib) for k in (1, 2, 3, 5, 8)]
[-1, 1, 1, -1, -1]
>>> kneading_sequence(fib, 5).bits
(0, 1, 1, 0, 0)
>>> compare_points(3, 8, fib)   # x_3 > x_8
1
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

from flint import arb, ctx

from .balls import less
from .cf import ContinuedFraction, is_admissible, qtable
from .errors import InsufficientPrefix, InvalidWord, NotAdmissible, PrecisionExhausted
from .ostrowski import OstrowskiWord, decode_int, encode_int, theta_lengths


def _require_admissible(cf):
    if not is_admissible(cf):
        raise NotAdmissible("signs are defined for admissible angles (a_1 = a_2 = a_3 = 1)")


def q_sign(n: int) -> int:
    """Sign of x_{q_n}: negative iff n = 0, 1 mod 4."""
    return -1 if n % 4 in (0, 1) else 1


def sign_of(k: int, cf: ContinuedFraction) -> int:
    """Sign of x_k from its Ostrowski digits (dominant term, then the q_n rules)."""
    if k <= 0:
        raise ValueError("the critical point x_0 has no sign")
    _require_admissible(cf)
    m, g = encode_int(k, cf).support()[0]
    s = q_sign(m)
    return -s if g > 1 else s


class SignTable:
    """Signs of x_1, x_2, ... grown on demand by the block recursion
    sign(g q_n + r) = sign(r) for 0 < r < q_n."""

    def __init__(self, cf: ContinuedFraction):
        _require_admissible(cf)
        self.cf = cf
        self.qt = qtable(cf)
        self.bits = bytearray([2])   # index 0 marks the critical point
        self._level = 1

    def ensure(self, length: int):
        bits, qt = self.bits, self.qt
        k = len(bits)
        if k > length:
            return
        n = self._level
        q_n, q_next = qt.q(n), qt.q(n + 1)
        # q_1 = q_0 = 1, so start the level walk at 1 and climb
        while k <= length:
            while q_next <= k:
                n += 1
                q_n, q_next = q_next, qt.q(n + 1)
            g, r = divmod(k, q_n)
            if r:
                bits.append(bits[r])
            else:
                neg = q_sign(n) < 0
                if g > 1:
                    neg = not neg
                bits.append(0 if neg else 1)
            k += 1
        self._level = n

    def sign(self, k: int) -> int:
        if k >= len(self.bits):
            self.ensure(max(k, 2 * len(self.bits)))
        b = self.bits[k]
        return 0 if b == 2 else (1 if b else -1)


@lru_cache(maxsize=64)
def sign_table(cf: ContinuedFraction) -> SignTable:
    return SignTable(cf)


@dataclass(frozen=True)
class SignSequence:
    """k_i = 0 if x_i < 0 and 1 if x_i > 0, for i = 1..len(bits)."""
    bits: tuple

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join(map(str, self.bits))

    def eventual_period(self, max_period: int, guard: int = 10) -> Optional[int]:
        """Smallest p <= max_period such that the word is p-periodic after its
        first len/guard symbols, or None.  A period has to be seen at least
        twice in full to count."""
        b = self.bits
        start = len(b) // guard
        for p in range(1, min(max_period, (len(b) - start) // 2) + 1):
            if all(b[i] == b[i + p] for i in range(start, len(b) - p)):
                return p
        return None


def kneading_sequence(cf: ContinuedFraction, length: int) -> SignSequence:
    t = sign_table(cf)
    t.ensure(length)
    return SignSequence(tuple(t.bits[1:length + 1]))


def neg_count(m: int, cf: ContinuedFraction) -> int:
    """Number of 0 < k < m with x_k < 0, by the block decomposition of m."""
    _require_admissible(cf)
    return _neg(cf, m)


@lru_cache(maxsize=None)
def _neg(cf, m):
    if m <= 3:
        # x_1 < 0 < x_2, x_3
        return 1 if m >= 2 else 0
    qt = qtable(cf)
    N = 2
    while qt.q(N + 1) < m:
        N += 1
    qN = qt.q(N)
    g, r = divmod(m, qN)
    s1 = q_sign(N) < 0
    sg = s1 if g == 1 else not s1
    total = g * _neg(cf, qN)
    # the block starts x_{j q_N}, 1 <= j < g: x_{q_N} by the q_n rule, the rest opposite
    if g >= 2:
        total += 1 if s1 else 0
        total += (g - 2) * (0 if s1 else 1)
    if r:
        total += 1 if sg else 0
        total += _neg(cf, r)
    return total


def neg_parity(m: int, cf: ContinuedFraction) -> int:
    return neg_count(m, cf) % 2


# -- order of orbit points -------------------------------------------------

def _index(w, cf):
    if isinstance(w, OstrowskiWord):
        if w.cf != cf:
            raise InvalidWord("word belongs to a different continued fraction")
        return decode_int(w), w
    return int(w), encode_int(int(w), cf)


def itinerary_cmp(a: int, b: int, cf: ContinuedFraction, max_steps: int = 10 ** 7) -> int:
    """Compare x_a and x_b by their itineraries (symbol order - < C < +)."""
    if a == b:
        return 0
    t = sign_table(cf)
    t.ensure(max(a, b) + 64)
    bits = t.bits
    flip = False
    for i in range(max_steps):
        ia, ib = a + i, b + i
        if ib >= len(bits) or ia >= len(bits):
            t.ensure(2 * max(ia, ib) + 64)
            bits = t.bits
        sa, sb = bits[ia], bits[ib]
        if sa != sb:
            # symbol values: 0 -> '-', 2 -> 'C', 1 -> '+'
            rank = {0: 0, 2: 1, 1: 2}
            r = -1 if rank[sa] < rank[sb] else 1
            return -r if flip else r
        if sa == 0:
            flip = not flip
    raise PrecisionExhausted("itineraries agree beyond the step limit")


def compare_points(u, v, cf: ContinuedFraction) -> int:
    """-1, 0, 1 as x_u <, =, > x_v; u and v are indices or Ostrowski words.

    Words are first cut to their shortest prefixes that differ, then the
    two truncated points are ordered by itinerary.
    """
    a, wa = _index(u, cf)
    b, wb = _index(v, cf)
    if a == b:
        return 0
    lo = min(wa.base, wb.base)
    n = lo
    while wa.digit(n) == wb.digit(n):
        n += 1
    qt = qtable(cf)
    ta = sum(wa.digit(i) * qt.q(i) for i in range(lo, n + 1))
    tb = sum(wb.digit(i) * qt.q(i) for i in range(lo, n + 1))
    return itinerary_cmp(ta, tb, cf)


def closer_to_critical(u: int, v: int, cf: ContinuedFraction) -> bool:
    """|x_u| < |x_v| in the unimodal sense, i.e. f(x_u) < f(x_v)."""
    if u == v:
        return False
    return itinerary_cmp(u + 1, v + 1, cf) < 0


def semiconjugacy_phi(w, cf: ContinuedFraction, precision: int = 256, orientation: int = -1) -> arb:
    """Circle point of the orbit point with address ``w``.

    With the default orientation the image is -sum(gamma_k theta_k) mod 1, so
    one step of the map is rotation by -theta.  ``orientation=+1`` returns the
    plain digit sum sum(gamma_k theta_k) mod 1.
    """
    _, word = _index(w, cf)
    if not word.digits:
        return arb(0)
    th = theta_lengths(cf, word.top, precision)
    with ctx.workprec(precision + 64):
        s = arb(0)
        for n, g in word.support():
            s += g * th[n]
        if orientation < 0:
            s = -s
        return s - s.mid().floor()


# -- the M^n hierarchy -----------------------------------------------------

@dataclass(frozen=True)
class HInterval:
    kind: str           # "I" or "J"
    k: int
    left: int           # orbit index of the left endpoint
    right: int

    def contains(self, m: int, cf) -> bool:
        return compare_points(self.left, m, cf) <= 0 <= compare_points(self.right, m, cf)


@dataclass
class IntervalHierarchy:
    cf: ContinuedFraction
    n: int
    intervals: list            # ordered by k
    checks: dict = field(default_factory=dict)

    def by_k(self, k):
        return self.intervals[k]

    def sorted_intervals(self):
        import functools
        key = functools.cmp_to_key(lambda s, t: compare_points(s.left, t.left, self.cf))
        return sorted(self.intervals, key=key)

    def to_json(self, coords=None, fmt=None):
        out = []
        for iv in self.intervals:
            rec = {"kind": iv.kind, "k": iv.k,
                   "left": str(encode_int(iv.left, self.cf)), "right": str(encode_int(iv.right, self.cf)),
                   "left_index": iv.left, "right_index": iv.right}
            if coords is not None:
                rec["left_x"] = fmt(coords[iv.left])
                rec["right_x"] = fmt(coords[iv.right])
            out.append(rec)
        return {"level": self.n, "intervals": out, "checks": self.checks}


def _ordered(a, b, cf):
    return (a, b) if compare_points(a, b, cf) < 0 else (b, a)


def hierarchy_intervals(cf: ContinuedFraction, n: int) -> list:
    """Endpoint indices of I_k^n (k < q_{n-1}) and J_k^n (q_{n-1} <= k < q_n)."""
    _require_admissible(cf)
    if n < 2:
        raise ValueError("levels start at n = 2")
    qt = qtable(cf)
    q_prev, q_n, q_next, q_next2 = qt.q(n - 1), qt.q(n), qt.q(n + 1), qt.q(n + 2)
    a1, a2 = cf.a(n + 1), cf.a(n + 2)
    out = []
    # x_{a_{n+2} q_{n+1}} is needed too: without it I_0^{n+1} can stick out
    # of I_0^n when a_{n+1} = 1 < a_{n+2}
    pts = [a1 * q_n, q_n, q_next, a2 * q_next, q_next2]
    lo = hi = pts[0]
    for p in pts[1:]:
        if compare_points(p, lo, cf) < 0:
            lo = p
        if compare_points(p, hi, cf) > 0:
            hi = p
    out.append(HInterval("I", 0, lo, hi))
    for k in range(1, q_prev):
        out.append(HInterval("I", k, *_ordered(k, k + a1 * q_n, cf)))
    for k in range(q_prev, q_n):
        other = k + (a1 - 1) * q_n if a1 > 1 else k + a2 * q_next
        out.append(HInterval("J", k, *_ordered(k, other, cf)))
    return out


def nesting_children(cf: ContinuedFraction, n: int, iv: HInterval) -> list:
    """(kind, k) of the level n+1 intervals making up ``iv`` at level n."""
    qt = qtable(cf)
    q_n = qt.q(n)
    a1 = cf.a(n + 1)
    k = iv.k
    if iv.kind == "I":
        return [("I", k)] + [("J", k + j * q_n) for j in range(1, a1 + 1)]
    if a1 == 1:
        return [("I", k)]
    return [("I", k)] + [("J", k + j * q_n) for j in range(1, a1)]


def build_hierarchy(cf: ContinuedFraction, n: int, verify: bool = True) -> IntervalHierarchy:
    """Level-n intervals; with ``verify`` the nesting into level n+1 and the
    disjointness of M^n are checked through compare_points."""
    h = IntervalHierarchy(cf, n, hierarchy_intervals(cf, n))
    if verify:
        h.checks = verify_hierarchy(h)
    return h


def verify_hierarchy(h: IntervalHierarchy) -> dict:
    cf, n = h.cf, h.n
    qt = qtable(cf)
    child = hierarchy_intervals(cf, n + 1)
    res = {"count": len(h.intervals) == qt.q(n)}
    # the children partition the level n+1 index set
    seen = []
    for iv in h.intervals:
        seen.extend(nesting_children(cf, n, iv))
    res["partition"] = sorted(k for _, k in seen) == list(range(qt.q(n + 1))) and all(
        (kind == "I") == (k < qt.q(n)) for kind, k in seen)
    # the children's extreme endpoints are the parent's endpoints
    hull_ok = True
    for iv in h.intervals:
        kids = [child[k] for _, k in nesting_children(cf, n, iv)]
        lo = hi = None
        for c in kids:
            if lo is None or compare_points(c.left, lo, cf) < 0:
                lo = c.left
            if hi is None or compare_points(c.right, hi, cf) > 0:
                hi = c.right
        hull_ok &= (lo == iv.left and hi == iv.right)
    res["nesting"] = hull_ok
    srt = h.sorted_intervals()
    res["disjoint"] = all(compare_points(s.right, t.left, cf) < 0 for s, t in zip(srt, srt[1:]))
    res["ok"] = all(res.values())
    return res


def neighbours_property(cf: ContinuedFraction, n: int, i: int, j: int) -> Optional[bool]:
    """None when the sign hypothesis fails, else whether M^n(x_j) lies in [x_i, x_j]."""
    if not (0 < j < i < qtable(cf).q(n)):
        raise ValueError("need 0 < j < i < q_n")
    t = sign_table(cf)
    if any(t.sign(k) != t.sign(i - j + k) for k in range(1, j + 1)):
        return None
    ivs = hierarchy_intervals(cf, n)
    home = [iv for iv in ivs if iv.contains(j, cf)]
    lo, hi = _ordered(i, j, cf)
    return all(compare_points(lo, iv.left, cf) <= 0 <= compare_points(hi, iv.right, cf) for iv in home)


# -- theta-recurrence ------------------------------------------------------

@dataclass
class Verdict:
    ok: bool
    depth: int
    level: Optional[int] = None
    clause: Optional[str] = None
    start: Optional[int] = None
    index: Optional[int] = None
    cause: Optional["Verdict"] = None

    def __bool__(self):
        return self.ok

    def describe(self):
        if self.ok:
            return f"theta-recurrent to depth {self.depth}"
        v = self
        while v.cause is not None:
            v = v.cause
        return (f"fails at level {self.level}, clause ({self.clause})"
                + (f"; block at {v.start} level {v.level} clause ({v.clause}) index {v.index}" if v is not self else
                   f"; index {self.index}"))


def ball_closer(orbit) -> Callable:
    """|x_u| < |x_v| for a list of certified balls; raises on overlap."""
    def closer(u, v):
        r = less(abs(orbit[u]), abs(orbit[v]))
        if r is None:
            raise PrecisionExhausted(f"cannot order |x_{u}| and |x_{v}|", index=max(u, v))
        return r
    return closer


def verify_recurrence(orbit, cf: ContinuedFraction, N: int, closer: Optional[Callable] = None) -> Verdict:
    """Check the recursive closest-return conditions at depth N.

    ``orbit`` may be a sequence of balls or exact rationals, an object with a
    ``closer(u, v)`` method (the model map), or None together with an explicit
    ``closer``.  Use :func:`symbolic_closer` for the purely combinatorial check.
    """
    if closer is None:
        if hasattr(orbit, "closer"):
            closer = orbit.closer
        elif orbit is not None and len(orbit) and isinstance(orbit[0], arb):
            closer = ball_closer(orbit)
        else:
            closer = lambda u, v: abs(orbit[u]) < abs(orbit[v])
    qt = qtable(cf)
    if orbit is not None and hasattr(orbit, "__len__") and len(orbit) <= qt.q(N):
        raise InsufficientPrefix(f"orbit must reach index q_{N} = {qt.q(N)}")
    memo = {}

    def check(s, L):
        key = (s, L)
        if key in memo:
            return memo[key]
        v = None
        if L >= 1:
            qL = qt.q(L)
            rets = []
            best = None
            for k in range(1, qL + 1):
                if not closer(s, s + k):
                    v = Verdict(False, N, L, "i", s, s + k)
                    break
                if best is None or closer(s + k, best):
                    best = s + k
                    rets.append(k)
            if v is None and rets != [qt.q(i) for i in range(1, L + 1)]:
                bad = next((r for r, q in zip(rets + [None], [qt.q(i) for i in range(1, L + 1)] + [None]) if r != q), None)
                v = Verdict(False, N, L, "ii", s, None if bad is None else s + bad)
            if v is None and L >= 2:
                q_prev = qt.q(L - 1)
                for m in range(cf.a(L)):
                    sub = check(s + m * q_prev, L - 1)
                    if not sub.ok:
                        v = Verdict(False, N, L, "iii", s, s + m * q_prev, cause=sub)
                        break
        if v is None:
            v = Verdict(True, N, L, start=s)
        memo[key] = v
        return v

    res = check(0, N)
    if res.ok:
        return Verdict(True, N)
    return res


def symbolic_closer(cf: ContinuedFraction) -> Callable:
    return lambda u, v: closer_to_critical(u, v, cf)
