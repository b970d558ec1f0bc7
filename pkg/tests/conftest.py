import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from gptshape.geometry import ShapeSpec, make_shape  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def circle128():
    return make_shape(ShapeSpec.circle(1.0), 128)


@pytest.fixture(scope="session")
def ellipse256():
    return make_shape(ShapeSpec.ellipse(2.0, 1.0), 256)


@pytest.fixture(scope="session")
def kite256():
    return make_shape(ShapeSpec.kite(), 256)


@pytest.fixture(scope="session")
def bump256():
    return make_shape(ShapeSpec.bump_circle(1.0, 0.0, 0.15, 0.3), 256)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
