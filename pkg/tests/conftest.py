import random

import pytest

from treescm.cyclefind import EquationGraph, Weight2x2
from treescm.model import M1, M2, TreeScm, random_model

W = Weight2x2.of

# Frozen instances. Their oracle solution counts are asserted in test_oracle.py.
CHAIN_NO_B = TreeScm(2, (None, 0, 1), ())
CHAIN_ROOT_B = TreeScm(2, (None, 0, 1), ((0, 1),))
# unknowns 1, 2, 3 form a triangle whose two cycle roots both solve every equation
TWO_BRANCH = TreeScm(3, (None, 0, 0, 2), ((0, 1), (0, 2), (0, 3)))
# the identifying cycle has two roots; an off-cycle equation keeps only one
ONE_BRANCH = TreeScm(5, (None, 0, 1, 0, 1, 1),
                     ((0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 5), (2, 3)))
# the second cycle root sends some parameter to a pole
POLE_BRANCH = TreeScm(7, (None, 0, 1, 1, 1, 2, 2, 5),
                      ((0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (1, 2), (1, 3), (1, 4),
                       (1, 5), (1, 6), (1, 7), (2, 3), (2, 4), (2, 7), (3, 4), (3, 5), (3, 6),
                       (3, 7), (4, 5), (4, 6), (4, 7), (5, 6)))


def xyzu_graph() -> EquationGraph:
    """The four-variable example graph with one identity triangle and one identifying one."""
    return EquationGraph(["x", "y", "z", "u"], {
        ("x", "y"): W([[1, 0], [2, 1]]),
        ("y", "z"): W([[1, 0], [-2, 1]]),
        ("z", "x"): W([[1, 0], [0, 1]]),
        ("x", "u"): W([[1, 2], [2, 1]]),
        ("u", "z"): W([[1, -1], [0, 1]]),
    })


def small_corpus(max_n: int = 6) -> list[TreeScm]:
    """Named instances plus a seeded random sample, all with n <= max_n."""
    named = [M1, M2, CHAIN_NO_B, CHAIN_ROOT_B, TWO_BRANCH, ONE_BRANCH, TreeScm(0, (None,), ())]
    rng = random.Random(20240601)
    sample = [random_model(rng.randint(1, max_n), rng.choice([0.2, 0.5, 0.8]), rng) for _ in range(40)]
    return [m for m in named + sample if m.n <= max_n]


@pytest.fixture
def xyzu():
    return xyzu_graph()


# acceptance summary -----------------------------------------------------------

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion number and title")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is not None:
        _CRITERIA[crit[0]] = (crit[1], report.outcome)


def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        item.user_properties.append(("criterion", mark.args))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        title, outcome = _CRITERIA[k]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {k:>2}: {verdict}  {title}")
