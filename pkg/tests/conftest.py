import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from matmdp import Policy, builtin_m1  # noqa: E402


@pytest.fixture
def m1():
    return builtin_m1()


@pytest.fixture
def uniform2():
    return Policy.uniform(2, 2)


@pytest.fixture
def selfloop2():
    return Policy(np.array([1.0, 0.0, 0.0, 1.0]), 2, 2)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
