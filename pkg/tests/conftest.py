import pytest

from wgdetect import BareParams, CavityParams

# Filled by test_acceptance; printed once at the end of the run.
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def bare_matched():
    """Resonant bare detector with Gamma_1 = gamma_q = 2pi * 0.16."""
    return BareParams.from_user(gamma_q=0.16, Gamma_1=0.16, delta=0.0)


@pytest.fixture
def cavity_reference():
    """Reference operating point: h = 0, V/2pi = 0.61, g/2pi = 0.29, resonance."""
    return CavityParams.from_user(gamma_q=0.16, gamma_c=0.76, h=0.0, V=0.61, g=0.29)
