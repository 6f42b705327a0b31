import pytest
from hypothesis import settings

from fgmtail import FgmPair, IidUniform, Marginal, ModelSpec

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def table1_model():
    pair = FgmPair(0.5, Marginal.pareto(2.01, 2.0), Marginal.pareto(2.2, 4.0))
    return ModelSpec(pair, IidUniform(2, 2, 1.0, 2.0, 1.0, 2.0))


@pytest.fixture(scope="session")
def table2_model():
    F = Marginal.pareto(2.01, 1.0)
    return ModelSpec(FgmPair(0.6, F, F), IidUniform(2, 2, 1.0, 2.0, 1.0, 2.0))


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in lines:
            terminalreporter.write_line(ln)
