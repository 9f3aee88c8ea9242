import numpy as np
import pytest

from assignflow.weights import WeightMatrix

ACCEPTANCE_LINES = []


def random_state(rng, m, n, floor=0.02):
    S = rng.dirichlet(np.ones(n), size=m) + floor
    return S / S.sum(axis=1, keepdims=True)


def random_weights(rng, m, density=1.0, diag=0.5, row_stochastic=True):
    A = rng.uniform(0.0, 1.0, (m, m)) * (rng.uniform(size=(m, m)) < density)
    A[np.diag_indices(m)] = rng.uniform(diag, diag + 1.0, m)
    if row_stochastic:
        A /= A.sum(axis=1, keepdims=True)
    return WeightMatrix(A)


def random_symmetric_form(rng, m):
    """Omega = Diag(w)^-1 Omega_hat with symmetric nonnegative Omega_hat and positive diagonal."""
    H = rng.uniform(0.0, 1.0, (m, m))
    H = H + H.T
    H[np.diag_indices(m)] += rng.uniform(0.5, 1.5, m)
    w = rng.uniform(0.5, 2.0, m) * H.sum(axis=1)
    return WeightMatrix.from_symmetric(H, w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
