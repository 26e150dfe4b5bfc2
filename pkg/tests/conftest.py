import numpy as np
import pytest
from hypothesis import settings

from coarse_rigidity import Relation

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_relation(rng, n, density=0.1):
    mask = rng.random((n, n)) < density
    return Relation.from_pairs(n, zip(*np.nonzero(mask)))


def brute_compose(e, f):
    return {(x, z) for (x, y) in e.pairs for (y2, z) in f.pairs if y == y2}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_isometry(rng, ny, nx):
    """Haar-like random isometry from the QR factor of a complex Gaussian matrix."""
    z = rng.standard_normal((ny, nx)) + 1j * rng.standard_normal((ny, nx))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def sparse_random_isometry(rng, n, block):
    """Block-diagonal random unitary with random blocks of size <= block, then permuted rows."""
    u = np.zeros((n, n), dtype=complex)
    i = 0
    while i < n:
        b = int(rng.integers(1, block + 1))
        b = min(b, n - i)
        u[i:i + b, i:i + b] = random_isometry(rng, b, b)
        i += b
    return u[rng.permutation(n)]


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
