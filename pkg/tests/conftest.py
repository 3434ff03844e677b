import numpy as np
import pytest
from hypothesis import settings

from encaqc.codes import preset

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
SINGLE = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}
PHASE = {"": 1, "+": 1, "+i": 1j, "i": 1j, "-": -1, "-i": -1j}


def kron_label(label):
    """Independent dense oracle: Kronecker product of 2x2 matrices, qubit 0 leftmost."""
    body = label.lstrip("+-i")
    token = label[: len(label) - len(body)]
    out = np.array([[1.0 + 0j]])
    for ch in body:
        out = np.kron(out, SINGLE[ch])
    return PHASE[token] * out


def random_density(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture(scope="session")
def c422():
    return preset("c422")


@pytest.fixture(scope="session")
def c513():
    return preset("c513")


@pytest.fixture(scope="session")
def bitflip3():
    return preset("bitflip3")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
