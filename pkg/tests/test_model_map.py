import json
from fractions import Fraction

import pytest

from conftest import FIB, GOLDEN_3_2
from thetarecur.cf import parse_angle, qtable
from thetarecur.errors import NotAdmissible
from thetarecur.model_map import SEED, construct_model, orientation_side
from thetarecur.symbolic import compare_points, neg_count, sign_table, verify_recurrence

ANGLES = [FIB, GOLDEN_3_2, "1,1,1,2,(1)*", "1,1,1,(2)*", "1,1,1,(3,1,4)*", "1,1,1,(1,3)*",
          "1,1,1,1,5,(1,2)*"]


@pytest.mark.parametrize("text", ANGLES)
@pytest.mark.parametrize("policy", ["midpoint", "third"])
@pytest.mark.parametrize("depth", [6, 7, 8])
def test_model_is_recurrent_and_monotone(text, policy, depth):
    cf = parse_angle(text)
    mm = construct_model(cf, depth, policy=policy)
    # x_0 .. x_{q_N}, plus the image of x_{q_N}
    assert len(mm.orbit) == qtable(cf).q(depth) + 2
    assert mm.orbit[:4] == SEED
    assert mm.monotone()
    assert mm.gaps_capped()
    assert verify_recurrence(mm, cf, depth).ok
    # the map sends each orbit point to the next one, exactly
    assert all(mm.evaluate(mm.orbit[k]) == mm.orbit[k + 1] for k in range(len(mm.orbit) - 1))


@pytest.mark.parametrize("text", ANGLES)
def test_model_order_and_signs(text):
    cf = parse_angle(text)
    mm = construct_model(cf, 7)
    x = mm.orbit
    t = sign_table(cf)
    assert all((x[k] > 0) == (t.sign(k) > 0) for k in range(1, len(x)))
    idx = sorted(range(len(x)), key=lambda k: x[k])
    assert all(compare_points(u, v, cf) < 0 for u, v in zip(idx, idx[1:]))


def test_evaluate_interpolates():
    mm = construct_model(parse_angle(FIB), 6)
    assert mm.evaluate(-1) == 1 and mm.evaluate(1) == 1
    assert mm.evaluate(0) == Fraction(-3, 4)
    # piecewise linear between neighbouring breakpoints
    bx = mm.breakpoints
    (x0, y0), (x1, y1) = bx[3], bx[4]
    mid = (x0 + x1) / 2
    assert mm.evaluate(mid) == (y0 + y1) / 2
    with pytest.raises(ValueError):
        mm.evaluate(2)


def test_limit_monotone():
    cf = parse_angle(FIB)
    mm = construct_model(cf, 10)
    for n in range(3, 6):
        for k in (1, 2):
            assert mm.limit_monotone(n, k)


@pytest.mark.parametrize("text", [GOLDEN_3_2, "1,1,1,(2)*", "1,1,1,(3,1,4)*"])
def test_neg_parity_shift(text):
    # Neg(k + q_n) and Neg(k) differ in parity for 0 < k < q_n when a_{n+1} > 1
    cf = parse_angle(text)
    qt = qtable(cf)
    for n in range(3, 8):
        if cf.a(n + 1) == 1:
            continue
        q = qt.q(n)
        for k in range(1, q):
            assert (neg_count(k + q, cf) - neg_count(k, cf)) % 2 == 1


def test_orientation_readings():
    cf = parse_angle(GOLDEN_3_2)
    q = qtable(cf).q(3)          # a_4 = 3: partners run over two copies of the block
    for k in range(1, q):
        # first copy: both readings look at Neg(k)
        assert orientation_side(k + q, q, cf, "derived") == orientation_side(k + q, q, cf, "literal")
        # second copy: the literal reading is off by one in parity
        assert orientation_side(k + 2 * q, q, cf, "derived") == -orientation_side(k + 2 * q, q, cf, "literal")
    # multiples of q_n move away from 0
    assert orientation_side(q, q, cf) == sign_table(cf).sign(q)


@pytest.mark.parametrize("text", [GOLDEN_3_2, "1,1,1,(3,1,4)*"])
def test_literal_orientation_reading_breaks_the_model(text):
    # documented outcome: reading Neg(partner - q_n) places cluster points on the wrong side
    cf = parse_angle(text)
    mm = construct_model(cf, 8, rule="literal")
    assert not mm.monotone()
    assert not verify_recurrence(mm, cf, 8).ok


def test_rejects_bad_input():
    with pytest.raises(NotAdmissible):
        construct_model(parse_angle("2,(1)*"), 6)
    with pytest.raises(ValueError):
        construct_model(parse_angle(FIB), 2)
    with pytest.raises(ValueError):
        construct_model(parse_angle(FIB), 6, policy="golden")


def test_json_is_exact():
    mm = construct_model(parse_angle(FIB), 5)
    data = json.loads(json.dumps(mm.to_json()))
    back = {int(k): Fraction(v) for k, v in data["orbit"].items()}
    assert [back[k] for k in range(len(mm.orbit))] == list(mm.orbit)
