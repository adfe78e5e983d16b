import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellkit import jordan, qcore, wwzb
from bellkit.correlations import born_distribution, correlators_direct
from bellkit.errors import InvalidInputError, NotProjectorError
from bellkit.qcore import BinaryPovm, MeasurementAssembly

from conftest import random_assembly, random_projector, random_state, random_unitary


def check_decomposition(dec, a1, b1):
    d = a1.shape[0]
    assert all(b.size in (1, 2) for b in dec.blocks)
    assert sum(b.size for b in dec.blocks) == d
    assert np.linalg.norm(dec.basis.conj().T @ dec.basis - np.eye(d)) <= 1e-9
    for m in (a1, b1, np.eye(d) - a1, np.eye(d) - b1):
        assert dec.off_block_residual(m) <= 1e-8


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 16))
def test_random_pairs_decompose(seed, d):
    rng = np.random.default_rng(seed)
    a1, b1 = random_projector(rng, d), random_projector(rng, d)
    check_decomposition(jordan.jordan_blocks(a1, b1), a1, b1)


@pytest.mark.parametrize("case", ["equal", "zero", "identity", "commuting", "complement"])
def test_degenerate_pairs(rng, case):
    d = 5
    p = random_projector(rng, d, 2)
    u = random_unitary(rng, d)
    pairs = {
        "equal": (p, p),
        "zero": (np.zeros((d, d)), p),
        "identity": (p, np.eye(d)),
        "commuting": (u @ np.diag([1, 1, 0, 0, 1]) @ u.conj().T, u @ np.diag([1, 0, 1, 0, 0]) @ u.conj().T),
        "complement": (p, np.eye(d) - p),
    }
    a1, b1 = pairs[case]
    dec = jordan.jordan_blocks(a1, b1)
    check_decomposition(dec, a1, b1)
    if case != "identity" and case != "zero":
        assert all(b.size == 1 for b in dec.blocks)


def test_near_degenerate_angle_is_refined(rng):
    # a principal angle of 2e-4 puts <v|A1|v> within 1e-7 of one
    u = random_unitary(rng, 4)
    t = 2e-4
    a = np.zeros((4, 4))
    a[0, 0] = 1
    b = np.zeros((4, 4))
    b[:2, :2] = [[np.cos(t) ** 2, np.cos(t) * np.sin(t)], [np.cos(t) * np.sin(t), np.sin(t) ** 2]]
    b[2, 2] = 1
    a1, b1 = u @ a @ u.conj().T, u @ b @ u.conj().T
    dec = jordan.jordan_blocks(a1, b1)
    check_decomposition(dec, a1, b1)
    assert sorted(b.size for b in dec.blocks) == [1, 1, 2]
    assert dec.flagged


def test_rejects_non_projectors():
    with pytest.raises(NotProjectorError):
        jordan.jordan_blocks(np.eye(2) / 2, np.eye(2))
    with pytest.raises(InvalidInputError):
        jordan.jordan_blocks(np.eye(2), np.eye(3))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_povm_mixture_reconstructs_effect(seed, d):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, d)
    e = u @ np.diag(rng.uniform(0, 1, size=d)) @ u.conj().T
    mix = jordan.povm_to_projective(BinaryPovm(e, np.eye(d) - e))
    weights = [w for w, _ in mix.components]
    assert sum(weights) == pytest.approx(1.0)
    assert min(weights) > 0
    assert np.allclose(mix.reconstruct(), e, atol=1e-10)
    for _, q in mix.components:
        assert qcore.is_projector(q)


def test_povm_mixture_of_projector_is_itself():
    p = BinaryPovm.from_observable(qcore.PAULI_Z)
    mix = jordan.povm_to_projective(p)
    assert len(mix.components) == 1
    assert np.allclose(mix.components[0][1], p.effect_1)


def mixture_distribution(red, n):
    total = 0
    for c in red.components:
        total = total + c.weight * born_distribution(c.state, c.assembly).probs
    return total


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (3, 2), (4, 3), (3, 3, 2), (5, 6)]))
def test_qubit_reduction_is_exact(seed, dims):
    rng = np.random.default_rng(seed)
    s = random_state(rng, dims)
    asm = random_assembly(rng, dims)
    red = jordan.qubit_reduce(s, asm)
    assert red.weights().sum() == pytest.approx(1.0)
    assert np.allclose(mixture_distribution(red, s.parties), born_distribution(s, asm).probs, atol=1e-10)
    ineq = wwzb.WwzbInequality.from_index(s.parties, int(rng.integers(2 ** 2**s.parties)))
    _, best = jordan.best_block(red, ineq)
    assert best >= wwzb.wwzb_score(ineq, correlators_direct(s, asm)) - 1e-10


def test_component_filter_reproduces_component(rng):
    s = random_state(rng, (3, 4))
    red = jordan.qubit_reduce(s, random_assembly(rng, (3, 4)))
    for i, comp in enumerate(red.components):
        out, p = qcore.apply_slo(red.component_filter(i), s)
        assert np.allclose(out.rho, comp.state.rho, atol=1e-10)


def test_reduction_needs_projective_measurements(rng):
    s = random_state(rng, (2, 2))
    noisy = BinaryPovm(np.eye(2) * 0.3, np.eye(2) * 0.7)
    asm = MeasurementAssembly(((noisy, noisy), random_assembly(rng, (2,)).povms[0]))
    with pytest.raises(InvalidInputError):
        jordan.qubit_reduce(s, asm)


def test_best_block_prefers_lowest_index_on_ties():
    s = qcore.QuantumState.maximally_mixed((4, 2))
    z = np.diag([1, -1, 1, -1]).astype(complex)
    asm = MeasurementAssembly.from_observables([(z, z), (qcore.PAULI_Z, qcore.PAULI_Z)])
    red = jordan.qubit_reduce(s, asm)
    assert jordan.best_block(red, wwzb.chsh())[0] == 0
