import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIB, GOLDEN_3_2, solved
from oracles import quadratic_orbit
from thetarecur.balls import less, mid_fraction
from thetarecur.cf import ContinuedFraction, parse_angle, qtable
from thetarecur.errors import InsufficientPrefix, NotAdmissible
from thetarecur.model_map import construct_model
from thetarecur.ostrowski import encode_int
from thetarecur.symbolic import build_hierarchy, closer_to_critical, compare_points, \
    hierarchy_intervals, kneading_sequence, neg_count, neg_parity, neighbours_property, \
    nesting_children, q_sign, sign_of, sign_table, symbolic_closer, verify_recurrence

admissible = st.builds(
    lambda mid, tail: ContinuedFraction([1, 1, 1] + mid, tail=tuple(tail)),
    st.lists(st.integers(1, 4), max_size=5),
    st.lists(st.integers(1, 3), min_size=1, max_size=3))


def test_q_sign_pattern():
    assert [q_sign(n) for n in range(8)] == [-1, -1, 1, 1, -1, -1, 1, 1]


@settings(max_examples=30, deadline=None)
@given(admissible)
def test_digit_rule_agrees_with_block_recursion(cf):
    t = sign_table(cf)
    for k in range(1, 600):
        assert sign_of(k, cf) == t.sign(k)


@settings(max_examples=30, deadline=None)
@given(admissible, st.integers(1, 3000))
def test_neg_count_brute_force(cf, m):
    t = sign_table(cf)
    brute = sum(1 for k in range(1, m) if t.sign(k) < 0)
    assert neg_count(m, cf) == brute
    assert neg_parity(m, cf) == brute % 2


@settings(max_examples=50, deadline=None)
@given(admissible, st.integers(0, 400), st.integers(0, 400))
def test_compare_points_antisymmetric(cf, u, v):
    assert compare_points(u, v, cf) == -compare_points(v, u, cf)
    assert (compare_points(u, v, cf) == 0) == (u == v)


@settings(max_examples=20, deadline=None)
@given(admissible, st.integers(0, 200), st.integers(0, 200), st.integers(0, 200))
def test_compare_points_transitive(cf, u, v, w):
    c = lambda a, b: compare_points(a, b, cf)
    if c(u, v) < 0 and c(v, w) < 0:
        assert c(u, w) < 0


def test_compare_points_accepts_words():
    cf = parse_angle(FIB)
    assert compare_points(encode_int(7, cf), encode_int(12, cf), cf) == compare_points(7, 12, cf)


def test_compare_points_against_certified_orbit():
    sol = solved(FIB, 10)
    orb = sol.orbit
    n = len(orb)
    checked = 0
    for u in range(n):
        for v in range(u + 1, n):
            r = less(orb[u], orb[v])
            if r is None:
                continue
            assert compare_points(u, v, sol.cf) == (-1 if r else 1)
            checked += 1
    assert checked == n * (n - 1) // 2


def test_closer_to_critical_against_orbit():
    sol = solved(GOLDEN_3_2, 8)
    orb = sol.orbit
    for u in range(1, 80):
        for v in range(u + 1, 80):
            r = less(abs(orb[u]), abs(orb[v]))
            assert closer_to_critical(u, v, sol.cf) == r


def test_kneading_sequence_matches_mpmath_orbit():
    # sign pattern from a plain mpmath iteration at the certified parameter
    sol = solved(GOLDEN_3_2, 8)
    c = mid_fraction(sol.enclosure.ball().mid())
    with mpmath.workdps(120):
        xs = quadratic_orbit(mpmath.mpf(c.numerator) / c.denominator, 60, dps=120)
    ks = kneading_sequence(sol.cf, 60)
    assert str(ks) == "".join("1" if x > 0 else "0" for x in xs[1:61])


def test_eventual_period_needs_two_periods():
    ks = kneading_sequence(parse_angle(FIB), 50)
    assert ks.eventual_period(50) is None


@pytest.mark.parametrize("text", [FIB, GOLDEN_3_2, "1,1,1,(2)*", "1,1,1,(3,1,4)*"])
def test_symbolic_closer_is_recurrent(text):
    cf = parse_angle(text)
    assert verify_recurrence(None, cf, 9, closer=symbolic_closer(cf)).ok


def test_verify_recurrence_rejects_bad_orbit():
    sol = solved(FIB, 10)
    pts = list(sol.orbit)
    # swap two points: x_5 is no longer a closest return
    pts[5], pts[6] = pts[6], pts[5]
    v = verify_recurrence(pts, sol.cf, 8)
    assert not v.ok and v.clause in ("i", "ii", "iii")
    assert "fails at level" in v.describe()


def test_verify_recurrence_needs_prefix():
    sol = solved(FIB, 8)
    with pytest.raises(InsufficientPrefix):
        verify_recurrence(sol.orbit, sol.cf, 10)


def test_non_admissible():
    with pytest.raises(NotAdmissible):
        sign_of(3, parse_angle("2,(1)*"))


@pytest.mark.parametrize("text", [FIB, GOLDEN_3_2, "1,1,1,(2)*"])
@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_hierarchy(text, n):
    cf = parse_angle(text)
    h = build_hierarchy(cf, n)
    assert h.checks["ok"], h.checks
    assert len(h.intervals) == qtable(cf).q(n)


@pytest.mark.parametrize("text", [FIB, GOLDEN_3_2])
def test_hierarchy_in_model_coordinates(text):
    # exact coordinates: level-n intervals are disjoint and level n+1 nests inside
    cf = parse_angle(text)
    mm = construct_model(cf, 9)
    x = mm.orbit
    span = lambda iv: (x[iv.left], x[iv.right])
    for n in (4, 5, 6):
        ivs = hierarchy_intervals(cf, n)
        assert all(lo < hi for lo, hi in map(span, ivs))
        ordered = sorted(map(span, ivs))
        assert all(a[1] < b[0] for a, b in zip(ordered, ordered[1:]))
        kids = hierarchy_intervals(cf, n + 1)
        for iv in ivs:
            lo, hi = span(iv)
            for kind, k in nesting_children(cf, n, iv):
                klo, khi = span(kids[k])
                assert kids[k].kind == kind and lo <= klo and khi <= hi


def test_neighbours_property_range():
    with pytest.raises(ValueError):
        neighbours_property(parse_angle(FIB), 5, 2, 3)


@pytest.mark.parametrize("text", [FIB, GOLDEN_3_2, "1,1,1,(2)*"])
def test_neighbours_property_holds(text):
    cf = parse_angle(text)
    q = qtable(cf).q(6)
    res = [neighbours_property(cf, 6, i, j) for i in range(2, q) for j in range(1, i)]
    applicable = [r for r in res if r is not None]
    assert len(applicable) >= 10
    assert all(applicable)
