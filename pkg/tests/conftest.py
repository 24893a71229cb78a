import math

import pytest

from cmnl import (
    Assortment,
    DeterministicPatience,
    ExponentialPatience,
    Instance,
    Product,
)


@pytest.fixture
def two_product_staged():
    """Two products over two stages, unit display costs, half-life-1 patience.

    With A at stage 0 and B at stage 1: reach of stage 1 is 0.5, purchase
    probabilities are 0.5 and 0.125, f = 0.75, g = 1.0. Hand-checked.
    """
    inst = Instance(
        products=(
            Product(revenue=1.0, cost=1.0, weights=(1.0,)),
            Product(revenue=2.0, cost=1.0, weights=(2.0,)),
        ),
        m=2,
        d=1,
        w=1,
        patience=ExponentialPatience(rate=math.log(2)),
    )
    return inst, Assortment(((0, 0, 0), (1, 0, 1)))


@pytest.fixture
def double_exposure():
    """One zero-cost product shown twice; probabilities 2/3 and 1/12."""
    inst = Instance(
        products=(Product(revenue=1.0, cost=0.0, weights=(2.0, 1.0)),),
        m=2,
        d=1,
        w=2,
        patience=ExponentialPatience(rate=1.0),
    )
    return inst, Assortment(((0, 0, 0), (0, 1, 1)))


@pytest.fixture
def patient_instance():
    """Deterministic budget far above any cost; survival is 1 everywhere."""
    return Instance(
        products=(
            Product(revenue=1.5, cost=0.1, weights=(1.0, 0.5)),
            Product(revenue=0.7, cost=0.2, weights=(2.0, 2.0)),
        ),
        m=3,
        d=2,
        w=2,
        patience=DeterministicPatience(budget=100.0),
    )


# collected by the acceptance suite; echoed after the run so the verdict per
# criterion is visible without -s
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance():
    def check(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
