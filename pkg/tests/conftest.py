import os

from gmpy2 import mpq
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", deadline=None, max_examples=15, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def rationals(draw, num=20, den=6, nonzero=False):
    p = draw(st.integers(-num, num).filter(lambda x: x or not nonzero))
    q = draw(st.integers(1, den))
    return mpq(p, q)


def small_coeffs(n, num=6, den=3):
    return st.lists(rationals(num, den), min_size=1, max_size=n)


# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
