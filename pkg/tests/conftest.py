import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("stress", parent=settings.get_profile("default"), max_examples=1000)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_chain(rng, n, lo=0.1, hi=10.0):
    """Ordered positions with log-uniform spacings in [lo, hi]."""
    gaps = np.exp(rng.uniform(np.log(lo), np.log(hi), n - 1))
    return rng.uniform(-5, 5) + np.concatenate([[0.0], np.cumsum(gaps)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def energy_scale(x, c=1.0):
    """c * sum of 1/spacing^2: the size of individual potential terms, used as the
    reference for relative round-off tolerances when V itself nearly cancels."""
    return c * np.sum(1.0 / np.diff(x) ** 2)


def force_scale(x, c=1.0):
    """Bound on one force entry's stencil terms, 8 c max(1/spacing)^3."""
    return 8 * c * np.max(1.0 / np.diff(x)) ** 3


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
