"""Certified orbits of x -> x^2 + c, the kneading bisection for the
theta-recurrent parameter, and the scaling data of its closest returns.

>>> orb = iterate_orbit(-1, 6)
>>> [int(v.unique_fmpz()) for v in orb]
[0, -1, 0, -1, 0, -1, 0]
>>> closest_returns(iterate_orbit(-2, 20), 20)
[1]
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from flint import arb, ctx

from .balls import PrecisionPolicy, fmt, from_fraction, less, sign
from .cf import ContinuedFraction, format_angle, qtable
from .errors import BracketFailure, PrecisionExhausted
from .symbolic import _require_admissible, sign_table

# symbol ranks in the kneading order: '-' < 'C' < '+'
_RANK = {-1: 0, 0: 1, 1: 2}
_TABLE_RANK = {0: 0, 2: 1, 1: 2}


def _as_ball(c) -> arb:
    if isinstance(c, arb):
        return c
    if isinstance(c, str):
        return arb(c)
    return from_fraction(c)


class Orbit:
    """Balls x_0 = 0, x_1 = c, ..., x_steps computed at ``bits`` of precision."""

    def __init__(self, c: arb, points: list, bits: int):
        self.c = c
        self.points = points
        self.bits = bits
        self.first_indeterminate = next(
            (k for k, x in enumerate(points) if k and sign(x) is None), None)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, k):
        return self.points[k]

    def __iter__(self):
        return iter(self.points)

    def certified_through(self) -> int:
        """Largest index up to which every sign is certain."""
        f = self.first_indeterminate
        return len(self.points) - 1 if f is None else f - 1

    def sign(self, k: int) -> int:
        s = sign(self.points[k])
        if s is None:
            raise PrecisionExhausted(f"sign of x_{k} is not certified at {self.bits} bits", index=k)
        return s

    def closer(self, u: int, v: int) -> bool:
        r = less(abs(self.points[u]), abs(self.points[v]))
        if r is None:
            raise PrecisionExhausted(f"cannot order |x_{u}| and |x_{v}|", index=max(u, v))
        return r


def iterate_orbit(c, steps: int, precision_bits: int = 128) -> Orbit:
    if steps < 1:
        raise ValueError("steps must be at least 1")
    with ctx.workprec(precision_bits):
        cb = +_as_ball(c)
        x = arb(0)
        pts = [x]
        for _ in range(steps):
            x = x * x + cb
            pts.append(x)
    return Orbit(cb, pts, precision_bits)


def closest_returns(orbit, horizon: int) -> list:
    """Times k <= horizon with |x_k| < |x_j| for every 0 < j < k."""
    if horizon >= len(orbit):
        raise ValueError("horizon lies beyond the computed orbit")
    out = []
    best = None
    for k in range(1, horizon + 1):
        ax = abs(orbit[k])
        if best is not None:
            r = less(ax, best)
            if r is None:
                raise PrecisionExhausted(f"cannot compare |x_{k}| with the running minimum", index=k)
            if not r:
                continue
        out.append(k)
        best = ax
    return out


# -- kneading bisection ----------------------------------------------------

def kneading_probe(c, cf: ContinuedFraction, bits: int, max_steps: int = 10 ** 6):
    """Compare the itinerary of c with the theta kneading sequence.

    Returns (r, k): r = -1 or +1 as the itinerary of c is below or above the
    target under the signed order, decided at step k; r is None when the sign
    of x_k is not certified at this precision.
    """
    table = sign_table(cf)
    with ctx.workprec(bits):
        cb = +_as_ball(c)
        x = arb(0)
        flip = False
        bits_ = table.bits
        for k in range(1, max_steps + 1):
            x = x * x + cb
            s = sign(x)
            if s is None:
                return None, k
            if k >= len(bits_):
                table.ensure(2 * k + 64)
                bits_ = table.bits
            t = _TABLE_RANK[bits_[k]]
            if _RANK[s] != t:
                r = -1 if _RANK[s] < t else 1
                return (-r if flip else r), k
            if s < 0:
                flip = not flip
    raise PrecisionExhausted(f"itinerary agrees with the target for {max_steps} steps")


@dataclass
class ParameterEnclosure:
    """Bisection bracket [lo, hi] containing the theta-recurrent parameter."""
    cf: ContinuedFraction
    depth: int
    lo: Fraction
    hi: Fraction
    bits: int
    policy: PrecisionPolicy = field(default_factory=PrecisionPolicy)
    probes: int = 0
    mid_mismatch: int = 0        # step at which the midpoint itinerary leaves the target
    max_steps: int = 10 ** 6

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def ball(self, bits: Optional[int] = None) -> arb:
        """A ball containing the whole bracket."""
        with ctx.workprec(bits or max(self.bits, self.width_bits() + 64)):
            m = from_fraction(self.mid)
            h = from_fraction(self.width / 2)
            return m + arb(0, h.upper())

    def width_bits(self) -> int:
        return self.width.denominator.bit_length() - self.width.numerator.bit_length() + 1

    def contains(self, other: "ParameterEnclosure") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def _probe(self, c):
        bits = self.bits
        while True:
            r, k = kneading_probe(c, self.cf, bits, self.max_steps)
            self.probes += 1
            if r is not None:
                self.bits = bits
                return r, k
            bits *= 2
            if bits > self.policy.cap_bits:
                raise PrecisionExhausted(
                    f"probe at step {k} needs more than {self.policy.cap_bits} bits", index=k)

    def refine(self, target_width, depth: Optional[int] = None) -> "ParameterEnclosure":
        """Continue bisecting (in place) until the bracket is at most
        ``target_width`` wide and the midpoint kneading matches through q_depth."""
        if depth is not None:
            self.depth = max(self.depth, depth)
        q_N = qtable(self.cf).q(self.depth)
        target_width = Fraction(target_width)
        while True:
            r, k = self._probe(self.mid)
            if self.width <= target_width and k > q_N:
                self.mid_mismatch = k
                return self
            if r < 0:
                self.lo = self.mid
            else:
                self.hi = self.mid

    def to_json(self):
        return {"angle": format_angle(self.cf), "depth": self.depth,
                "lo": str(self.lo), "hi": str(self.hi), "c": fmt(self.ball(), 30),
                "width": f"2^-{self.width_bits() - 1}" if self.width.numerator == 1 else str(self.width),
                "bits": self.bits, "probes": self.probes, "mid_mismatch": self.mid_mismatch}


def find_c(cf: ContinuedFraction, depth: int, target_width=Fraction(1, 10 ** 30),
           policy: Optional[PrecisionPolicy] = None, max_steps: int = 10 ** 6) -> ParameterEnclosure:
    """Bisect [-2, 0] under the signed kneading order toward the parameter
    whose itinerary is the theta kneading sequence."""
    _require_admissible(cf)
    policy = policy or PrecisionPolicy()
    enc = ParameterEnclosure(cf, depth, Fraction(-2), Fraction(0), policy.start_bits, policy,
                             max_steps=max_steps)
    r_lo, _ = enc._probe(enc.lo)
    r_hi, _ = enc._probe(enc.hi)
    if not (r_lo < 0 < r_hi):
        raise BracketFailure("kneading order does not separate the initial bracket [-2, 0]")
    return enc.refine(target_width)


@dataclass
class Solution:
    """A parameter enclosure with an orbit certified over the whole bracket."""
    cf: ContinuedFraction
    enclosure: ParameterEnclosure
    orbit: Orbit

    @property
    def length(self):
        return len(self.orbit) - 1


def solve(cf: ContinuedFraction, length: int, policy: Optional[PrecisionPolicy] = None,
          start_width_bits: int = 64, max_width_bits: int = 4096,
          enclosure: Optional[ParameterEnclosure] = None) -> Solution:
    """Shrink the bracket until every sign of x_1..x_length is certified for
    all parameters in it, then return the bracket and the enclosing orbit."""
    policy = policy or PrecisionPolicy()
    n = 1
    qt = qtable(cf)
    while qt.q(n) < length:
        n += 1
    wb = start_width_bits
    enc = enclosure
    while True:
        if enc is None:
            enc = find_c(cf, n, Fraction(1, 2 ** wb), policy)
        else:
            enc.refine(Fraction(1, 2 ** wb), n)
        orb = iterate_orbit(enc.ball(), length, max(enc.bits, wb + 64))
        if orb.first_indeterminate is None:
            return Solution(cf, enc, orb)
        if 2 * wb > max_width_bits:
            raise PrecisionExhausted(
                f"orbit certified only through x_{orb.certified_through()}",
                certified=orb.certified_through())
        wb *= 2


# -- scaling data ----------------------------------------------------------

@dataclass
class ScalingData:
    """Closest-return magnitudes and ratios at levels 1..n_max + 1."""
    cf: ContinuedFraction
    c: arb
    n_max: int
    bits: int
    d: dict          # (n, i) -> |x_{i q_n}|
    delta: dict      # (n, i) -> ratio, n >= 2
    lam: dict        # n -> d_n^1 / d_{n-1}^1
    alpha: dict      # n -> delta_{n+1}^{a_{n+2}}
    deriv: dict      # n -> prod_{j=1}^{q_n - 1} 2 x_j
    orbit: Orbit = field(repr=False, default=None)

    def a(self, n):
        return self.cf.a(n)

    def levels(self):
        return range(2, self.n_max + 1)

    def delta_below_one(self) -> dict:
        return {k: bool(v < 1) for k, v in self.delta.items()}

    def chain(self, n_lo: int = 1, n_hi: Optional[int] = None) -> list:
        """d-values from level n_hi down to n_lo in increasing order."""
        n_hi = self.n_max + 1 if n_hi is None else n_hi
        out = []
        for n in range(n_hi, n_lo - 1, -1):
            for i in range(1, self.cf.a(n + 1) + 1):
                out.append(((n, i), self.d[(n, i)]))
        return out

    def chain_ordered(self) -> bool:
        ch = self.chain()
        return all(less(u, v) is True for (_, u), (_, v) in zip(ch, ch[1:]))

    def lambda_products(self) -> dict:
        """n -> whether lambda_n and the product of the level-n deltas overlap
        with radii below the working precision scale."""
        out = {}
        for n in self.lam:
            if n < 2 or (n, 1) not in self.delta:
                continue
            with ctx.workprec(self.bits):
                p = arb(1)
                for i in range(1, self.cf.a(n + 1) + 1):
                    p *= self.delta[(n, i)]
                out[n] = bool(p.overlaps(self.lam[n]))
        return out

    def rows(self):
        for n in range(1, self.n_max + 2):
            for i in range(1, self.cf.a(n + 1) + 1):
                yield {"n": n, "i": i, "d": fmt(self.d[(n, i)]),
                       "delta": fmt(self.delta[(n, i)]) if (n, i) in self.delta else "",
                       "lambda": fmt(self.lam[n]) if i == 1 and n in self.lam else "",
                       "alpha": fmt(self.alpha[n]) if i == 1 and n in self.alpha else "",
                       "deriv": fmt(self.deriv[n]) if i == 1 and n in self.deriv else ""}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["n", "i", "d", "delta", "lambda", "alpha", "deriv"],
                           lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow(row)
        return buf.getvalue()

    def to_json(self):
        return {"angle": format_angle(self.cf), "c": fmt(self.c, 30), "n_max": self.n_max,
                "bits": self.bits, "rows": list(self.rows()),
                "checks": {"delta_below_one": all(self.delta_below_one().values()),
                           "chain_ordered": self.chain_ordered(),
                           "lambda_product": all(self.lambda_products().values())}}


def required_length(cf: ContinuedFraction, n_max: int) -> int:
    # d_{n_max+2}^i = |x_{i q_{n_max+2}}| with i <= a_{n_max+3}
    return qtable(cf).q(n_max + 3)


def scaling_data(sol: Solution, n_max: int) -> ScalingData:
    cf, orb = sol.cf, sol.orbit
    qt = qtable(cf)
    top = required_length(cf, n_max)
    if orb.certified_through() < top:
        deepest = 0
        while qt.q(deepest + 3) <= orb.certified_through():
            deepest += 1
        raise PrecisionExhausted(f"orbit certified through x_{orb.certified_through()}, "
                                 f"enough for level {deepest - 1}", deepest_level=deepest - 1)
    with ctx.workprec(orb.bits):
        d = {}
        for n in range(1, n_max + 3):
            for i in range(1, cf.a(n + 1) + 1):
                d[(n, i)] = abs(orb[i * qt.q(n)])
        delta = {}
        for n in range(2, n_max + 3):
            a = cf.a(n + 1)
            for i in range(1, a):
                delta[(n, i)] = d[(n, i)] / d[(n, i + 1)]
            delta[(n, a)] = d[(n, a)] / d[(n - 1, 1)]
        lam = {n: d[(n, 1)] / d[(n - 1, 1)] for n in range(2, n_max + 3)}
        alpha = {n: delta[(n + 1, cf.a(n + 2))] for n in range(1, n_max + 2)}
        deriv = {}
        p = arb(1)
        j = 1
        for n in range(1, n_max + 3):
            while j < qt.q(n):
                p *= 2 * orb[j]
                j += 1
            deriv[n] = +p
    return ScalingData(cf, orb.c, n_max, orb.bits, d, delta, lam, alpha, deriv, orb)


def solve_scaling(cf: ContinuedFraction, n_max: int, policy: Optional[PrecisionPolicy] = None) -> ScalingData:
    return scaling_data(solve(cf, required_length(cf, n_max), policy), n_max)
