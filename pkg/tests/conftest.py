import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("tomolab", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("tomolab")


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(line)
