import os

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from leslie_allee.model import ScaledParams

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    print_blob=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))


FIG2 = dict(A=0.08, C=0.1, M=0.1, Q=0.19)
FIG10 = dict(A=0.4, C=0.06, M=-0.1, Q=0.53)
FIG11 = dict(A=0.5, C=0.09, M=-0.1, Q=0.5555556, S=0.15)


def fig2(S):
    return ScaledParams(**FIG2, S=S)


@pytest.fixture
def fig2a():
    return fig2(0.2)


@pytest.fixture
def fig2b():
    return fig2(0.08)


@pytest.fixture
def fig2c():
    return fig2(0.06)


@pytest.fixture
def fig11():
    return ScaledParams(**FIG11)


def unit(lo, hi):
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False)


@st.composite
def scaled_params(draw, sign=None):
    """Valid ScaledParams; ``sign`` fixes the sign of M when given."""
    m = draw(unit(0.01, 0.9))
    if sign is None:
        sign = draw(st.sampled_from((-1, 1)))
    return ScaledParams(
        A=draw(unit(0.01, 0.9)),
        C=draw(unit(0.01, 0.5)),
        M=sign * m,
        Q=draw(unit(0.01, 1.0)),
        S=draw(unit(0.01, 1.0)),
    )


# (criterion, line) pairs, echoed in the terminal summary
ACCEPTANCE: list[tuple[str, str]] = []


def _crit_key(c):
    digits = "".join(ch for ch in c if ch.isdigit())
    return int(digits), c


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE, key=lambda x: _crit_key(x[0])):
            terminalreporter.write_line(line)
