import numpy as np
import pytest

from kflow.algebra import MetricLieAlgebra
from kflow.catalog import structure_constants

ACCEPTANCE_LINES = []


def mk(n, brackets, complex_field=False, gram=None, **kw):
    mu = structure_constants(n, brackets, complex_field)
    if gram is None:
        gram = np.eye(n)
    return MetricLieAlgebra(mu, np.asarray(gram), "complex" if complex_field else "real", **kw)


def random_gram(rng, n, complex_field=False, spread=0.5):
    X = rng.standard_normal((n, n))
    if complex_field:
        X = X + 1j * rng.standard_normal((n, n))
    G = np.eye(n) + spread * (X @ X.conj().T) / n
    return 0.5 * (G + G.conj().T)


def random_two_step(rng, n, center, complex_field=False, density=1.0):
    """2-step nilpotent bracket: ``[e_i, e_j]`` lands in the last ``center`` vectors."""
    m = n - center
    dtype = complex if complex_field else float
    mu = np.zeros((n, n, n), dtype=dtype)
    for i in range(m):
        for j in range(i + 1, m):
            if rng.random() > density:
                continue
            v = rng.standard_normal(center)
            if complex_field:
                v = v + 1j * rng.standard_normal(center)
            mu[i, j, m:] = v
            mu[j, i, m:] = -v
    return mu


def random_solvable(rng, k, m, complex_field=False):
    """``R^k`` acting on an abelian ``R^m`` by simultaneously diagonalisable matrices."""
    n = k + m
    dtype = complex if complex_field else float
    S = rng.standard_normal((m, m)) + 2 * np.eye(m)
    Sinv = np.linalg.inv(S)
    mu = np.zeros((n, n, n), dtype=dtype)
    for i in range(k):
        A = S @ np.diag(rng.standard_normal(m)) @ Sinv
        mu[i, k:, k:] = A.T
        mu[k:, i, k:] = -A.T
    return mu


def transform(mu, A):
    """Structure constants of ``mu`` transported by ``A``: ``A mu(A^-1 x, A^-1 y)``."""
    B = np.linalg.inv(A)
    n = mu.shape[0]
    out = np.zeros_like(mu, dtype=np.result_type(mu, A))
    for i in range(n):
        for j in range(n):
            out[i, j] = A @ np.einsum("a,b,abc->c", B[:, i], B[:, j], mu)
    return out


def random_algebra(rng, complex_field=False, max_dim=6):
    """A random valid metric Lie algebra of dimension at most ``max_dim``."""
    kind = rng.integers(3)
    if kind == 0:
        n = int(rng.integers(3, max_dim + 1))
        center = int(rng.integers(1, n - 1))
        mu = random_two_step(rng, n, center, complex_field)
    elif kind == 1:
        k = int(rng.integers(1, 3))
        m = int(rng.integers(1, max_dim - k + 1))
        mu = random_solvable(rng, k, m, complex_field)
    else:
        base = structure_constants(4, [(1, 2, 3, 1), (1, 3, 2, 1), (2, 3, 4, 1)], complex_field)
        A = np.eye(4) + 0.3 * rng.standard_normal((4, 4))
        mu = transform(base, A)
    n = mu.shape[0]
    field = "complex" if complex_field else "real"
    return MetricLieAlgebra(mu, random_gram(rng, n, complex_field), field)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
