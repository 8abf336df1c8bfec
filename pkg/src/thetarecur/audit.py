"""Audits of the scaling inequalities and asymptotic trends against
certified ScalingData, and the Hausdorff epsilon-measure table.

Every comparison is a ball comparison: a check passes only when the whole
ball sits on the right side, fails only when it certainly sits on the
wrong side, and is indeterminate otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from flint import arb, ctx

from .balls import fmt, less
from .cf import format_angle, qtable
from .errors import InsufficientData
from .quadratic import ScalingData
from .symbolic import hierarchy_intervals

PASS, FAIL, INDET, SKIP = "pass", "fail", "indeterminate", "skipped"
DEFAULT_EPS = (1.0, 0.5, 0.2, 0.1, 0.05)


@dataclass
class AuditRecord:
    claim: str
    levels: list
    status: str
    worst_margin: Optional[arb] = None
    detail: dict = field(default_factory=dict)

    def to_json(self):
        return {"claim": self.claim, "levels": self.levels, "status": self.status,
                "worst_margin": None if self.worst_margin is None else fmt(self.worst_margin),
                "detail": self.detail}


@dataclass
class AuditReport:
    name: str
    records: list
    params: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        st = {r.status for r in self.records}
        if FAIL in st:
            return FAIL
        if INDET in st:
            return INDET
        return PASS

    @property
    def ok(self) -> bool:
        return self.verdict == PASS

    def record(self, claim) -> AuditRecord:
        return next(r for r in self.records if r.claim == claim)

    def to_json(self):
        return {"audit": self.name, "params": self.params, "verdict": self.verdict,
                "records": [r.to_json() for r in self.records]}


class _Check:
    """Accumulates certified `lhs < rhs` outcomes into one record."""

    def __init__(self, claim):
        self.claim = claim
        self.levels = []
        self.statuses = []
        self.margins = []
        self.detail = {}

    def lt(self, level, lhs, rhs, key=None):
        r = less(lhs, rhs)
        st = PASS if r else (FAIL if r is False else INDET)
        if level not in self.levels:
            self.levels.append(level)
        self.statuses.append(st)
        self.margins.append(rhs - lhs)
        if st != PASS:
            self.detail.setdefault("violations", []).append(
                {"level": level, "key": key, "lhs": fmt(lhs), "rhs": fmt(rhs), "status": st})
        return st

    def record(self, empty=PASS) -> AuditRecord:
        if not self.statuses:
            return AuditRecord(self.claim, [], empty, None, self.detail)
        st = FAIL if FAIL in self.statuses else INDET if INDET in self.statuses else PASS
        worst = min(self.margins, key=lambda m: float(m.lower()))
        return AuditRecord(self.claim, self.levels, st, worst, self.detail)


def _f(x) -> float:
    return float(x.mid())


def _levels(sd: ScalingData, start: int):
    return list(range(start, sd.n_max + 1))


# -- a priori bounds -------------------------------------------------------

def apriori_quantity(sd: ScalingData, n: int) -> arb:
    a = sd.cf.a(n + 1)
    if a > 1:
        return sd.delta[(n, a - 1)] * sd.delta[(n, a)]
    return sd.alpha[n] * sd.delta[(n, 1)]


def audit_apriori(sd: ScalingData) -> AuditReport:
    with ctx.workprec(sd.bits):
        sup = _Check("apriori_product_below_one")
        vals = {}
        for n in _levels(sd, 2):
            v = apriori_quantity(sd, n)
            vals[n] = v
            sup.lt(n, v, arb(1))
        rec = sup.record()
        if vals:
            rec.detail["sup"] = fmt(max(vals.values(), key=_f))
            rec.detail["values"] = {str(n): fmt(v) for n, v in vals.items()}
        # chain of inequalities 1/(1-y^2) <= ((1+x)/(1-x))^2 (quadratic maps:
        # non-positive Schwarzian, so the error terms vanish)
        poin = _Check("apriori_poincare")
        for n in _levels(sd, 3):
            a = sd.cf.a(n + 1)
            d = sd.delta
            ys = [sd.alpha[n]] + [d[(n, i)] for i in range(1, a)]
            xs = [d[(n, i)] for i in range(1, a)] + [d[(n, a)] * sd.lam[n - 1]]
            for y, x in zip(ys, xs):
                lhs = 1 / (1 - y * y)
                rhs = ((1 + x) / (1 - x)) ** 2
                # non-strict inequality: only a certain reversal is a failure
                st = less(rhs, lhs)
                if n not in poin.levels:
                    poin.levels.append(n)
                poin.statuses.append(FAIL if st else PASS if st is False else INDET)
                poin.margins.append(rhs - lhs)
        return AuditReport("apriori", [rec, poin.record()], {"n_max": sd.n_max})


# -- asymptotic trends -----------------------------------------------------

def recursion_ratio(sd: ScalingData, n: int) -> arb:
    a1, a2 = sd.cf.a(n + 1), sd.cf.a(n + 2)
    al = sd.alpha
    return (al[n + 1] ** (2 ** a2) * al[n]) / (al[n] ** (2 ** a1) * al[n - 1] / 2 ** a1)


def _slope(xs, ys):
    """Least-squares slope with ball arithmetic."""
    m = len(xs)
    xb = sum(xs) / m
    yb = sum(ys, arb(0)) / m
    num = sum(((x - xb) * (y - yb) for x, y in zip(xs, ys)), arb(0))
    den = sum((x - xb) ** 2 for x in xs)
    return num / den


def audit_asymptotics(sd: ScalingData) -> AuditReport:
    if sd.n_max < 6:
        raise InsufficientData("asymptotic trends need levels up to at least 6")
    recs = []
    with ctx.workprec(sd.bits):
        ns = list(range(1, sd.n_max + 1))
        third = ns[-max(2, -(-len(ns) // 3)):]
        dec = _Check("alpha_decreasing")
        for n in third[:-1]:
            dec.lt(n, sd.alpha[n + 1], sd.alpha[n])
        rec = dec.record()
        rec.detail["alpha"] = {str(n): fmt(sd.alpha[n]) for n in ns}
        rec.detail["whole_range_decreasing"] = all(less(sd.alpha[n + 1], sd.alpha[n]) for n in ns[:-1])
        recs.append(rec)

        # delta_n^i / alpha_n^(2^i) for 0 < i < a_{n+1}
        ratios = {}
        for n in range(2, sd.n_max + 1):
            for i in range(1, sd.cf.a(n + 1)):
                ratios[(n, i)] = sd.delta[(n, i)] / sd.alpha[n] ** (2 ** i)
        band = _Check("delta_alpha_ratio_band")
        deep = ns[-3:]
        for (n, i), r in ratios.items():
            if n in deep:
                band.lt(n, arb(1) / 2, r, key=i)
                band.lt(n, r, arb(2), key=i)
        rec = band.record()
        rec.detail["ratios"] = {f"{n},{i}": fmt(r) for (n, i), r in ratios.items()}
        recs.append(rec)

        trend = _Check("delta_alpha_ratio_trend")
        for i in sorted({i for _, i in ratios}):
            seq = [(n, abs(ratios[(n, i)] - 1)) for n in third if (n, i) in ratios]
            for (n0, e0), (n1, e1) in zip(seq, seq[1:]):
                st = less(e0, e1)
                trend.levels.append(n1)
                trend.statuses.append(FAIL if st else PASS if st is False else INDET)
                trend.margins.append(e0 - e1)
        recs.append(trend.record())

        rr = {n: recursion_ratio(sd, n) for n in range(2, sd.n_max + 1)}
        lo = min(rr.values(), key=_f)
        hi = max(rr.values(), key=_f)
        r_lo, r_hi = less(lo, arb(1)), less(arb(1), hi)
        st = PASS if (r_lo and r_hi) else FAIL if (r_lo is False or r_hi is False) else INDET
        dev = [abs(rr[n] - 1) for n in sorted(rr) if n in third]
        recs.append(AuditRecord("recursion_ratio_band", sorted(rr), st, None, {
            "ratios": {str(n): fmt(v) for n, v in rr.items()},
            "band": [fmt(lo), fmt(hi)],
            "narrowing_over_deepest_third": all(less(b, a) is not False for a, b in zip(dev, dev[1:]))}))

        xs = ns
        ys = [sd.alpha[n].log() for n in xs]
        s = _slope(xs, ys)
        st = PASS if s < 0 else FAIL if s >= 0 else INDET
        recs.append(AuditRecord("log_alpha_slope", xs, st, -s, {"slope": fmt(s)}))
    return AuditReport("asymptotics", recs, {"n_max": sd.n_max})


# -- K bounds --------------------------------------------------------------

def _k_checks(sd: ScalingData, n: int, C):
    """(claim, lhs, rhs, key) tuples at level n for constant C; the gated
    ones are tagged so the caller can skip them."""
    cf, al, d, dl, lam = sd.cf, sd.alpha, sd.d, sd.delta, sd.lam
    K = lambda m: 1 + C * al[m]
    a1, a2 = cf.a(n + 1), cf.a(n + 2)
    out = []
    # valid for every level
    for i in range(1, a1):
        out.append(("sqrt_bound", False, dl[(n, i)], 2 * dl[(n, i + 1)].sqrt(), i))
    out.append(("sqrt_bound", False, dl[(n, a1)], 2 * dl[(n - 1, 1)].sqrt(), a1))
    lhs = al[n + 1] ** 2 * lam[n + 1]
    rhs = K(n + 1) * K(n) * K(n - 1) ** a1 * K(n - 2) / 2 ** a1 * al[n] ** 2 * lam[n]
    out.append(("lambda_step", False, lhs, rhs, None))
    base = d[(n, 1)] / d[(n + 1, a2)] ** 2
    der = abs(sd.deriv[n])
    out.append(("derivative_estimate", False, base / K(n - 1), der, "lower"))
    out.append(("derivative_estimate", False, der, K(n - 1) * (1 + al[n + 1] * al[n]) * base, "upper"))
    # two-sided band, 0 < k < a_{n+1}
    g = K(n - 1) ** 2 * K(n)
    for k in range(1, a1):
        r = dl[(n, k)] / al[n] ** (2 ** k)
        out.append(("delta_band", "band", 1 / g ** (2 ** k - 1), r, k))
        out.append(("delta_band", "band", r, g ** (2 ** k - 1), k))
    # ratio bound of the alpha recursion
    A = max(a1, a2)
    M = max((K(m) for m in (n + 1, n, n - 1, n - 2)), key=_f)
    out.append(("decrease_ratio", "decrease", recursion_ratio(sd, n) / 2 ** a1,
                M ** (2 ** (A + 3)) / 2 ** a1, None))
    return out


def _gates(sd, n, C):
    al = sd.alpha
    K = lambda m: 1 + C * al[m]
    r2 = arb(2).sqrt()
    band = [less(al[n], arb(1) / 2), less(K(n - 1), r2), less(K(n), arb(2))]
    dec = [less(al[n], arb(1) / 2), less(al[n + 1], arb(1) / 2),
           less(K(n - 1), r2), less(K(n), r2), less(K(n + 1), r2)]

    def fold(v):
        if all(v):
            return True
        if any(x is False for x in v):
            return False
        return None
    return {"band": fold(band), "decrease": fold(dec)}


def minimal_C(sd: ScalingData, n: int, claim: str, key=None, hi: float = 1e6) -> Optional[float]:
    """Smallest C > 4 (to about 1e-6 relative) at which the named check holds
    at level n, ignoring the gate; None if it fails even at ``hi``."""
    def holds(C):
        with ctx.workprec(sd.bits):
            Cb = arb(C)
            return all(less(lhs, rhs) for c, _, lhs, rhs, k in _k_checks(sd, n, Cb)
                       if c == claim and (key is None or k == key))
    if not holds(hi):
        return None
    lo = 4.0
    if holds(lo):
        return lo
    while hi - lo > 1e-6 * hi:
        mid = (lo + hi) / 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


def audit_k_bounds(sd: ScalingData, C=5) -> AuditReport:
    if not C > 4:
        raise ValueError("the constant must exceed 4")
    claims = ["sqrt_bound", "lambda_step", "derivative_estimate", "delta_band", "decrease_ratio"]
    checks = {c: _Check(c) for c in claims}
    gate_log = {}
    with ctx.workprec(sd.bits):
        Cb = arb(Fraction(C).numerator) / Fraction(C).denominator
        for n in _levels(sd, 3):
            gates = _gates(sd, n, Cb)
            gate_log[n] = gates
            for claim, gate, lhs, rhs, key in _k_checks(sd, n, Cb):
                if gate:
                    g = gates[gate]
                    if g is False:
                        continue
                    if g is None:
                        checks[claim].levels.append(n)
                        checks[claim].statuses.append(INDET)
                        checks[claim].margins.append(rhs - lhs)
                        continue
                checks[claim].lt(n, lhs, rhs, key)
    recs = []
    for c in claims:
        rec = checks[c].record(empty=SKIP if c in ("delta_band", "decrease_ratio") else PASS)
        if rec.status == FAIL:
            rec.detail["minimal_C"] = {str(v["level"]): minimal_C(sd, v["level"], c, v["key"])
                                       for v in rec.detail["violations"] if v["status"] == FAIL}
        recs.append(rec)
    rep = AuditReport("k_bounds", recs, {"C": str(C), "n_max": sd.n_max})
    rep.params["gated_levels"] = {"band": [n for n, g in gate_log.items() if g["band"]],
                                  "decrease": [n for n, g in gate_log.items() if g["decrease"]]}
    return rep


def audit_all(sd: ScalingData, C=5) -> dict:
    reps = [audit_apriori(sd), audit_asymptotics(sd), audit_k_bounds(sd, C)]
    verdict = FAIL if any(r.verdict == FAIL for r in reps) else (
        INDET if any(r.verdict == INDET for r in reps) else PASS)
    return {"angle": format_angle(sd.cf), "verdict": verdict, "reports": [r.to_json() for r in reps]}


# -- Hausdorff epsilon-measure ---------------------------------------------

@dataclass
class HausdorffTable:
    levels: list
    eps_grid: tuple
    S: dict                      # (eps, n) -> arb
    decreasing: dict             # eps -> True/False/None over the deepest three levels
    geometric_ratio: Optional[arb]
    dimension_bound: Optional[float]

    def to_json(self):
        return {"levels": self.levels, "eps_grid": list(self.eps_grid),
                "S": {f"{e}": {str(n): fmt(self.S[(e, n)]) for n in self.levels} for e in self.eps_grid},
                "decreasing": {str(e): v for e, v in self.decreasing.items()},
                "geometric_ratio": None if self.geometric_ratio is None else fmt(self.geometric_ratio),
                "dimension_bound": self.dimension_bound}


def level_lengths(orbit, cf, n: int) -> list:
    """Balls |M^n(x_k)|, k < q_n, from the interval endpoints of level n."""
    return [abs(orbit[iv.left] - orbit[iv.right]) for iv in hierarchy_intervals(cf, n)]


def hausdorff_measure(orbit, cf, levels, eps_grid=DEFAULT_EPS) -> HausdorffTable:
    """S_n(eps) = sum_k |M^n(x_k)|^eps over the given levels."""
    levels = sorted(levels)
    qt = qtable(cf)
    if len(orbit) <= qt.q(levels[-1] + 2):
        raise InsufficientData(f"level {levels[-1]} needs the orbit through x_{qt.q(levels[-1] + 2)}")
    S = {}
    with ctx.workprec(orbit.bits if hasattr(orbit, "bits") else 256):
        for n in levels:
            lens = level_lengths(orbit, cf, n)
            logs = [ln.log() for ln in lens]   # nan if a length ball touches 0
            for e in eps_grid:
                eb = arb(str(e))
                S[(e, n)] = sum((l_ * eb).exp() for l_ in logs) if all(l_.is_finite() for l_ in logs) \
                    else arb("nan")
        deep = levels[-3:]
        decreasing = {}
        for e in eps_grid:
            v = [less(S[(e, b)], S[(e, a)]) for a, b in zip(deep, deep[1:])]
            decreasing[e] = True if all(v) else (False if any(x is False for x in v) else None)
        geo = None
        if 1.0 in eps_grid and len(levels) >= 2:
            geo = _slope(levels, [S[(1.0, n)].log() for n in levels]).exp()
    bound = min((e for e in eps_grid if decreasing[e]), default=None)
    return HausdorffTable(levels, tuple(eps_grid), S, decreasing, geo, bound)
