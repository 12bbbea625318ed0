import numpy as np
import pytest

from tiltedchsh import bell

CHSH_SCENARIO = bell.CHSH_SCENARIO

_ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_table(rng, scenario=CHSH_SCENARIO):
    raw = rng.random(scenario.shape)
    return raw / raw.sum(axis=(0, 1), keepdims=True)


def record_acceptance(line):
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)
