import numpy as np
import pytest

from wvamp import statevec as sv


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_ket(register, rng) -> sv.Ket:
    dim = 2 ** len(register)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return sv.ket_from_amplitudes(v, register, normalize=True)


def random_hermitian(register, rng) -> sv.Operator:
    dim = 2 ** len(register)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return sv.Operator((m + m.conj().T) / 2.0, register, hermitian=True)


def random_unitary(register, rng) -> sv.Operator:
    dim = 2 ** len(register)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(m)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return sv.Operator(q, register)
