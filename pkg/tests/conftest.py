import numpy as np
import pytest

from bellkit.qcore import MeasurementAssembly, QuantumState


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projector(rng, d, rank=None):
    rank = int(rng.integers(0, d + 1)) if rank is None else rank
    u = random_unitary(rng, d)[:, :rank]
    return u @ u.conj().T


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_state(rng, dims, rank=None):
    return QuantumState(tuple(dims), random_density(rng, int(np.prod(dims)), rank))


def random_product_state(rng, dims):
    rho = np.ones((1, 1), dtype=complex)
    for d in dims:
        rho = np.kron(rho, random_density(rng, d))
    return QuantumState(tuple(dims), rho)


def random_separable_state(rng, dims, terms=4):
    w = rng.dirichlet(np.ones(terms))
    rho = sum(wi * random_product_state(rng, dims).rho for wi in w)
    return QuantumState(tuple(dims), rho)


def random_observable(rng, d):
    p = random_projector(rng, d, d // 2 if d > 1 else 1)
    return 2 * p - np.eye(d)


def random_assembly(rng, dims):
    return MeasurementAssembly.from_observables([(random_observable(rng, d), random_observable(rng, d)) for d in dims])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
