import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from isac_crlb.config import make_rng

settings.register_profile(
    "repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

DESK_B = 4e6


@pytest.fixture
def rng():
    return make_rng(0)


@pytest.fixture
def desk_fmcw():
    from isac_crlb.waveform import FMCW

    # B*T = 256 keeps the chirp spectrum close to a brick wall
    return FMCW(DESK_B, 64e-6, 64)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LOG: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LOG


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LOG):
            terminalreporter.write_line(line)
