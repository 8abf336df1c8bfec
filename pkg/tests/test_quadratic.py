from fractions import Fraction

import mpmath
import pytest
from flint import arb, ctx

from conftest import FIB, GOLDEN_2, GOLDEN_3_2, solved
from oracles import quadratic_orbit
from thetarecur.balls import PrecisionPolicy, mid_fraction
from thetarecur.cf import parse_angle, qtable
from thetarecur.errors import NotAdmissible, PrecisionExhausted
from thetarecur.quadratic import closest_returns, find_c, iterate_orbit, kneading_probe, \
    required_length, scaling_data


def mp_of(fr):
    return mpmath.mpf(fr.numerator) / fr.denominator


def contains_mp(ball, x, dps=60):
    lo, hi = mid_fraction(ball.lower()), mid_fraction(ball.upper())
    xf = Fraction(mpmath.nstr(x, dps))
    slack = Fraction(1, 10 ** (dps - 5))
    return lo - slack <= xf <= hi + slack


def test_orbit_encloses_mpmath():
    orb = iterate_orbit("-1.75", 40, 200)
    with mpmath.workdps(80):
        ref = quadratic_orbit(mpmath.mpf("-1.75"), 40, dps=80)
        assert all(contains_mp(b, r) for b, r in zip(orb, ref))
    assert orb.certified_through() == 40


def test_orbit_indeterminate_sign():
    # around c = -1 the point x_2 = c^2 + c straddles 0
    orb = iterate_orbit(arb(-1, 1e-10), 5)
    assert orb.first_indeterminate == 2
    assert orb.certified_through() == 1 and orb.sign(1) == -1
    with pytest.raises(PrecisionExhausted):
        orb.sign(2)


def test_closest_returns_plain():
    orb = iterate_orbit(Fraction(-3, 2), 30, 128)
    with mpmath.workdps(50):
        ref = quadratic_orbit(mpmath.mpf(-1.5), 30, dps=50)
        best, expect = None, []
        for k in range(1, 31):
            if best is None or abs(ref[k]) < best:
                best = abs(ref[k])
                expect.append(k)
    assert closest_returns(orb, 30) == expect
    with pytest.raises(ValueError):
        closest_returns(orb, 31)


def test_probe_brackets():
    cf = parse_angle(FIB)
    assert kneading_probe(-2, cf, 128)[0] == -1
    assert kneading_probe(0, cf, 128)[0] == 1


def test_find_c_returns_fibonacci_times():
    cf = parse_angle(FIB)
    enc = find_c(cf, 12, Fraction(1, 2 ** 80))
    assert enc.width <= Fraction(1, 2 ** 80)
    assert enc.mid_mismatch > qtable(cf).q(12)
    # independent check: plain iteration at the midpoint
    with mpmath.workdps(60):
        xs = quadratic_orbit(mp_of(enc.mid), 233, dps=60)
        best, rets = None, []
        for k in range(1, 234):
            if best is None or abs(xs[k]) < best:
                best = abs(xs[k])
                rets.append(k)
    assert rets == [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233]


def test_refinement_is_nested_and_stable():
    cf = parse_angle(GOLDEN_2)
    coarse = find_c(cf, 8, Fraction(1, 2 ** 40))
    lo, hi = coarse.lo, coarse.hi
    coarse.refine(Fraction(1, 2 ** 100), 10)
    assert lo <= coarse.lo and coarse.hi <= hi
    # a run at doubled starting precision lands in the same bracket
    other = find_c(cf, 10, Fraction(1, 2 ** 100), PrecisionPolicy(start_bits=256))
    assert other.lo <= coarse.hi and coarse.lo <= other.hi
    with ctx.workprec(400):
        assert coarse.ball().contains(arb(other.mid.numerator) / other.mid.denominator)


def test_find_c_rejects_non_admissible():
    with pytest.raises(NotAdmissible):
        find_c(parse_angle("2,(1)*"), 5)


@pytest.mark.parametrize("text,c", [
    (FIB, "-1.87052863216464488889"),
    (GOLDEN_3_2, "-1.79609934900976786"),
    (GOLDEN_2, "-1.81185320823549633"),
])
def test_parameter_values(text, c):
    sol = solved(text, 8)
    ball = sol.enclosure.ball()
    assert abs(mid_fraction(ball.mid()) - Fraction(c)) < Fraction(1, 10 ** 17)


def test_solution_certifies_whole_bracket():
    sol = solved(GOLDEN_3_2, 8)
    n = qtable(sol.cf).q(8)
    assert sol.length == n and sol.orbit.certified_through() == n
    # both bracket ends iterate inside the enclosure
    for end in (sol.enclosure.lo, sol.enclosure.hi):
        with mpmath.workdps(300):
            xs = quadratic_orbit(mp_of(end), 60, dps=300)
            assert all(contains_mp(sol.orbit[k], xs[k], 250) for k in range(60))


def test_scaling_data_identities(fib_scaling10):
    sd = fib_scaling10
    cf, orb = sd.cf, sd.orbit
    qt = qtable(cf)
    with ctx.workprec(sd.bits):
        for (n, i), v in sd.d.items():
            assert v.overlaps(abs(orb[i * qt.q(n)]))
        for n in range(2, 12):
            assert sd.lam[n].overlaps(sd.d[(n, 1)] / sd.d[(n - 1, 1)])
    assert all(sd.delta_below_one().values())
    assert sd.chain_ordered()
    assert all(sd.lambda_products().values())


def test_derivative_against_finite_differences(fib_scaling10):
    sd = fib_scaling10
    c = mid_fraction(sd.c.mid())
    qt = qtable(sd.cf)
    with mpmath.workdps(80):
        cm = mp_of(c)

        def g(y, steps):
            for _ in range(steps):
                y = y * y + cm
            return y
        for n in range(2, 8):
            m = qt.q(n) - 1
            fd = mpmath.diff(lambda y: g(y, m), cm)
            got = mp_of(mid_fraction(sd.deriv[n].mid()))
            assert abs(fd - got) <= mpmath.mpf(10) ** -30 * max(1, abs(fd))


def test_scaling_csv(fib_scaling10):
    text = fib_scaling10.to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "n,i,d,delta,lambda,alpha,deriv"
    assert len(lines) == 1 + 11
    assert all("±" in field for field in lines[1].split(",")[2:3])


def test_scaling_data_needs_long_orbit():
    sol = solved(FIB, 8)
    with pytest.raises(PrecisionExhausted) as exc:
        scaling_data(sol, 10)
    assert exc.value.info["deepest_level"] < 10


def test_required_length():
    assert required_length(parse_angle(FIB), 10) == 377
