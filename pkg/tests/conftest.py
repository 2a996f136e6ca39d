import pytest

from wgcqed.config import environment_from, load_config, structure_from
from wgcqed.phonons import phonon_correlation_table


@pytest.fixture(scope="session")
def fig3_env():
    return environment_from(load_config(preset="fig3-short"))


@pytest.fixture(scope="session")
def fig3_table(fig3_env):
    return phonon_correlation_table(fig3_env)


@pytest.fixture(scope="session")
def fig3_short():
    return structure_from(load_config(preset="fig3-short"))


@pytest.fixture(scope="session")
def fig3_long():
    return structure_from(load_config(preset="fig3-long"))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
