import numpy as np
import pytest

from sparsepr.sensing import DenseEnsemble, SparseSignal

# Lines recorded by the acceptance suite, echoed in the terminal summary so the
# per-criterion verdicts are visible without ``-s``.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def random_instance(rng, n, m, s, field="real", noise=0.0):
    """Test-local instance built from numpy's default generator (independent of the package RNG)."""
    A = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2)
    S = np.sort(rng.choice(n, s, replace=False))
    x = np.zeros(n, complex if field == "complex" else float)
    x[S] = rng.standard_normal(s)
    if field == "complex":
        x[S] = x[S] + 1j * rng.standard_normal(s)
    y = np.abs(A @ x) ** 2 + noise * rng.standard_normal(m)
    return DenseEnsemble(A, "complex_gaussian"), SparseSignal(x, S, field), y


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
