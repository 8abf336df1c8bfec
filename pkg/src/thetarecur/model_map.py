"""An explicit piecewise-linear theta-recurrent map with rational orbit.

The orbit x_0 = 0, x_1, ..., x_{q_N + 1} is built level by level: every new
point x_t is dropped into the gap next to an already placed partner (x_{t-q_n}
or 0), on the side dictated by the sign and orientation rules, at the middle
of that gap but never further than 2^-(n+1) from the partner.

>>> from thetarecur.cf import parse_angle
>>> mm = construct_model(parse_angle("1,(1)*"), 6)
>>> len(mm.orbit), mm.orbit[:4]
(15, (Fraction(0, 1), Fraction(-3, 4), Fraction(1, 2), Fraction(1, 4)))
>>> all(mm.evaluate(mm.orbit[k]) == mm.orbit[k + 1] for k in range(14))
True
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from .cf import ContinuedFraction, format_angle, is_admissible, qtable
from .errors import NotAdmissible, ThetaRecurError
from .symbolic import neg_parity, sign_table

SEED = (Fraction(0), Fraction(-3, 4), Fraction(1, 2), Fraction(1, 4))


@dataclass(frozen=True)
class Placement:
    stage: int
    index: int
    partner: int
    side: int            # +1: placed to the right of the partner
    length: Fraction


@dataclass
class ModelMap:
    cf: ContinuedFraction
    depth: int
    orbit: tuple                      # x_0 .. x_{q_N + 1}
    placements: list = field(default_factory=list)
    _bx: list = field(default_factory=list, repr=False)
    _by: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        pts = [(Fraction(-1), Fraction(1)), (Fraction(1), Fraction(1))]
        pts += [(self.orbit[k], self.orbit[k + 1]) for k in range(len(self.orbit) - 1)]
        pts.sort()
        self._bx = [p for p, _ in pts]
        self._by = [v for _, v in pts]

    @property
    def breakpoints(self):
        return list(zip(self._bx, self._by))

    def evaluate(self, x) -> Fraction:
        x = Fraction(x)
        if not -1 <= x <= 1:
            raise ValueError("the model map lives on [-1, 1]")
        i = bisect.bisect_left(self._bx, x)
        if i < len(self._bx) and self._bx[i] == x:
            return self._by[i]
        x0, x1 = self._bx[i - 1], self._bx[i]
        y0, y1 = self._by[i - 1], self._by[i]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def closer(self, u: int, v: int) -> bool:
        """|x_u| < |x_v| in the unimodal sense: f(x_u) < f(x_v)."""
        return self.evaluate(self.orbit[u]) < self.evaluate(self.orbit[v])

    def monotone(self) -> bool:
        """Strictly decreasing left of 0 and increasing right of 0 on the breakpoints."""
        left = [(x, y) for x, y in self.breakpoints if x <= 0]
        right = [(x, y) for x, y in self.breakpoints if x >= 0]
        return (all(y0 > y1 for (_, y0), (_, y1) in zip(left, left[1:]))
                and all(y0 < y1 for (_, y0), (_, y1) in zip(right, right[1:])))

    def stage_gaps(self) -> dict:
        """Largest placement distance per construction stage."""
        out = {}
        for pl in self.placements:
            out[pl.stage] = max(out.get(pl.stage, Fraction(0)), pl.length)
        return out

    def gaps_capped(self) -> bool:
        return all(v < Fraction(1, 2 ** n) for n, v in self.stage_gaps().items())

    def limit_monotone(self, n: int, k: int) -> bool:
        """x_{k q_n + q_m}, m = n+2, n+3, ..., approach x_{k q_n} monotonically
        (each one between its predecessor and the limit)."""
        qt = qtable(self.cf)
        base = k * qt.q(n)
        top = len(self.orbit) - 1
        if base > top:
            raise ValueError("base point lies beyond the constructed orbit")
        lim = self.orbit[base]
        seq = []
        m = n + 2
        while base + qt.q(m) <= top:
            seq.append(self.orbit[base + qt.q(m)])
            m += 1
        dist = [abs(v - lim) for v in seq]
        sides = {(v > lim) - (v < lim) for v in seq}
        return all(d1 < d0 for d0, d1 in zip(dist, dist[1:])) and len(sides) <= 1

    def to_json(self):
        s = lambda v: f"{v.numerator}/{v.denominator}"
        return {"angle": format_angle(self.cf), "depth": self.depth,
                "breakpoints": [[s(x), s(y)] for x, y in self.breakpoints],
                "orbit": {str(k): s(x) for k, x in enumerate(self.orbit)}}


class _Line:
    """Sorted set of placed points with neighbour lookup."""

    def __init__(self, pts):
        self.xs = sorted(pts)

    def add(self, x):
        i = bisect.bisect_left(self.xs, x)
        if i < len(self.xs) and self.xs[i] == x:
            raise ThetaRecurError("placement collided with an existing point")
        self.xs.insert(i, x)

    def neighbour(self, x, side):
        i = bisect.bisect_left(self.xs, x)
        j = i + 1 if side > 0 else i - 1
        if not 0 <= j < len(self.xs):
            return None
        return self.xs[j]


def orientation_side(partner: int, q_n: int, cf: ContinuedFraction, rule: str = "derived") -> int:
    """Side (+1 right, -1 left) of x_{partner+q_n} relative to x_partner.

    Writing partner = j q_n + m with 0 <= m < q_n, the map f^m carries the pair
    (x_{j q_n}, x_{(j+1) q_n}) onto (x_partner, x_new) and |x_{(j+1) q_n}| is the
    larger one, so for m > 0 the new point is to the right iff Neg(m) is even.
    For m = 0 the new point sits further from 0 than its partner.
    ``rule="literal"`` reads Neg(partner - q_n) instead whenever j >= 1.
    """
    j, m = divmod(partner, q_n)
    if m == 0:
        return sign_table(cf).sign(partner)
    if rule == "literal" and j >= 1:
        m = partner - q_n
    return 1 if neg_parity(m, cf) == 0 else -1


POLICIES = {"midpoint": Fraction(1, 2), "third": Fraction(1, 3)}


def construct_model(cf: ContinuedFraction, N: int, policy: str = "midpoint",
                    rule: str = "derived") -> ModelMap:
    """Orbit of the model map up to x_{q_N + 1} (N >= 3) in exact rationals.

    ``policy`` picks where in its admissible gap a new point goes (the
    fraction of the gap measured from the partner); the distance is then
    clamped to 2^-(n+1) at stage n.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown placement policy {policy!r}")
    frac = POLICIES[policy]
    if not is_admissible(cf):
        raise NotAdmissible("the model map needs an admissible angle")
    if N < 3:
        raise ValueError("depth must be at least 3")
    qt = qtable(cf)
    x = {k: v for k, v in enumerate(SEED)}
    line = _Line(x.values())
    log = []

    def place(stage, t, partner, side):
        p = x[partner]
        nb = line.neighbour(p, side)
        if nb is None:
            raise ThetaRecurError(f"no room beside x_{partner} for x_{t}")
        d = min(abs(nb - p) * frac, Fraction(1, 2 ** (stage + 1)))
        x[t] = p + side * d
        line.add(x[t])
        log.append(Placement(stage, t, partner, side, d))

    def near_zero(stage, t):
        place(stage, t, 0, sign_table(cf).sign(t))

    def step(stage, partner, q_n):
        place(stage, partner + q_n, partner, orientation_side(partner, q_n, cf, rule))

    for n in range(3, N):
        q_prev, q_n = qt.q(n - 1), qt.q(n)
        a = cf.a(n + 1)
        if a == 1:
            for m in range(1, q_prev):
                step(n, m, q_n)
        else:
            for m in range(1, q_n):
                step(n, m, q_n)
            near_zero(n, 2 * q_n)
            for m in range(1, (a - 2) * q_n + 1):
                step(n, m + q_n, q_n)
            for m in range(1, q_prev):
                step(n, m + (a - 1) * q_n, q_n)
        near_zero(n, qt.q(n + 1))
    # the image of x_{q_N} fixes f there; left to interpolation it can land
    # on the wrong side of f(x_{q_{N-1}})
    step(N, 1, qt.q(N))
    orbit = tuple(x[k] for k in range(qt.q(N) + 2))
    return ModelMap(cf, N, orbit, log)
