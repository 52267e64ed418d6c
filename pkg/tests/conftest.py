import numpy as np
import pytest


def eig2x2(m):
    """Closed-form eigenvalues of a 2x2 Hermitian matrix, ascending."""
    a, c = m[0, 0].real, m[1, 1].real
    r = np.sqrt(((a - c) / 2) ** 2 + abs(m[0, 1]) ** 2)
    return np.array([(a + c) / 2 - r, (a + c) / 2 + r])


def random_hermitian(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def random_unitary(d, rng):
    q, r = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
