import pytest

from wsn_sched.core import ChipsetProfile, RadioState, load_profiles


@pytest.fixture(scope="session")
def profiles():
    return load_profiles()


@pytest.fixture
def toy_profile():
    cur = {RadioState.TRANSMIT: 10.0, RadioState.RECEIVE: 5.0,
           RadioState.LISTEN: 5.0, RadioState.SLEEP: 0.0}
    return ChipsetProfile("toy", 3.0, cur)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
