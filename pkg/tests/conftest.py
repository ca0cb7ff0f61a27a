import numpy as np
import pytest

from tentkit.ode_core import LinearStructuredOde

ACCEPTANCE_LINES: list[str] = []


def random_pair(seed: int, m: int = 4, scale: float = 0.8):
    """Random (L, B) with spectral norms equal to ``scale``."""
    rng = np.random.default_rng(seed)
    L = rng.standard_normal((m, m))
    B = rng.standard_normal((m, m))
    return scale * L / np.linalg.norm(L, 2), scale * B / np.linalg.norm(B, 2)


def pair_ode(L, B) -> LinearStructuredOde:
    """Structured ODE with M0 = I so that A~ = L and M1~ = B."""
    return LinearStructuredOde(np.eye(L.shape[0]), B, L)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
