import numpy as np
import pytest

from diversion_sentry.core import RngStream
from diversion_sentry.simulator import default_paper_scenario, generate, generate_training_and_test

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def paper_config():
    return default_paper_scenario()


@pytest.fixture(scope="session")
def paper_data(paper_config):
    return generate_training_and_test(paper_config, RngStream(2024))


@pytest.fixture(scope="session")
def paper_training(paper_data):
    return paper_data[0]


@pytest.fixture(scope="session")
def paper_test(paper_data):
    return paper_data[1]


@pytest.fixture
def make_training(paper_config):
    def make(seed, length=None):
        return generate(paper_config, length or paper_config.training_length, None, RngStream(seed))

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
