import numpy as np
import pytest

from conformal_balls.conformal import compose_all, random_rotation, rotation_ambient, scale_plus, translate_minus, translate_plus

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_lorentz(rng, n, spread=0.6):
    """A generic conformal map built from every generator family."""
    return compose_all(
        rotation_ambient(random_rotation(rng, n + 1)),
        translate_plus(rng.normal(scale=spread, size=n)),
        scale_plus(float(np.exp(rng.normal(scale=spread))), n),
        translate_minus(rng.normal(scale=spread, size=n)),
    )
