import pytest

from thetarecur.cf import parse_angle, qtable
from thetarecur.quadratic import solve, solve_scaling

FIB = "1,(1)*"
GOLDEN_3_2 = "1,1,1,3,2,(1)*"
GOLDEN_2 = "1,1,1,2,(1)*"


@pytest.fixture(scope="session")
def fib():
    return parse_angle(FIB)


@pytest.fixture(scope="session")
def ang32():
    return parse_angle(GOLDEN_3_2)


@pytest.fixture(scope="session")
def ang2():
    return parse_angle(GOLDEN_2)


_solutions = {}


def solved(text, level):
    """Certified solution through x_{q_level}, cached for the whole session."""
    key = (text, level)
    if key not in _solutions:
        cf = parse_angle(text)
        _solutions[key] = solve(cf, qtable(cf).q(level))
    return _solutions[key]


@pytest.fixture(scope="session")
def fib_scaling10():
    return solve_scaling(parse_angle(FIB), 10)


@pytest.fixture(scope="session")
def fib_scaling14():
    return solve_scaling(parse_angle(FIB), 14)


@pytest.fixture(scope="session")
def fib_deep():
    # orbit through q_23, enough for the M^n lengths up to level 21
    return solved(FIB, 23)


# one summary line per acceptance criterion
_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    num = int(name.split("_")[2])
    if report.when == "call" or report.outcome != "passed":
        prev = _criteria.get(num, (name, "PASS"))[1]
        status = "PASS" if report.outcome == "passed" and prev == "PASS" else "FAIL"
        _criteria[num] = (name, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        name, status = _criteria[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  ({name})")
