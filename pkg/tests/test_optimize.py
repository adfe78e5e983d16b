import numpy as np
import pytest

from bellkit import optimize as op
from bellkit import qcore, wwzb
from bellkit.correlations import correlators_direct
from bellkit.errors import InvalidInputError
from bellkit.optimize import SearchBudget

from conftest import random_state

SMALL = SearchBudget(rng_seed=5, seesaw_restarts=4, filter_candidates=12)


def noisy_partial_state(theta=0.6, q=0.4):
    # entangled part mixed with a product state that local filtering can suppress
    psi = np.cos(theta) * qcore.ket("00") + np.sin(theta) * qcore.ket("11")
    noise = qcore.ket("01")
    rho = q * np.outer(psi, psi.conj()) + (1 - q) * np.outer(noise, noise.conj())
    return qcore.QuantumState((2, 2), rho)


def test_budget_validation():
    with pytest.raises(InvalidInputError):
        SearchBudget(rng_seed=1, seesaw_restarts=0)
    with pytest.raises(InvalidInputError):
        SearchBudget(rng_seed=1, convergence_eps=0.0)


def test_seesaw_singlet_reaches_tsirelson():
    r = op.seesaw(qcore.singlet_state(), wwzb.chsh(), SMALL)
    assert r.best_score == pytest.approx(np.sqrt(2), abs=1e-6)
    assert op.score(qcore.singlet_state(), r.assembly, wwzb.chsh()) == pytest.approx(r.best_score, abs=1e-9)
    assert r.assembly.is_projective()


def test_seesaw_trace_is_monotone(rng):
    s = random_state(rng, (3, 2, 2))
    r = op.seesaw(s, wwzb.WwzbInequality.from_index(3, 150), SMALL)
    assert np.all(np.diff(r.trace) >= -1e-12)


def test_seesaw_matches_closed_form(rng):
    for _ in range(20):
        s = random_state(rng, (2, 2))
        r = op.seesaw(s, wwzb.chsh(), SMALL)
        assert r.best_score == pytest.approx(op.chsh_two_qubit_max(s), abs=1e-6)


def test_free_rank_never_worse(rng):
    s = random_state(rng, (3, 3))
    fixed = op.seesaw(s, wwzb.chsh(), SMALL)
    free = op.seesaw(s, wwzb.chsh(), SMALL, free_rank=True)
    assert free.best_score >= fixed.best_score - 1e-9
    # a trivial assembly already scores 1 when ranks are free
    assert free.best_score >= 1 - 1e-9


def test_seesaw_is_reproducible():
    s = qcore.werner_state(0.9)
    a = op.seesaw(s, wwzb.chsh(), SMALL)
    b = op.seesaw(s, wwzb.chsh(), SMALL)
    assert a.trace == b.trace
    assert np.array_equal(a.assembly.observables_array(), b.assembly.observables_array())


def test_seesaw_respects_initial_assembly():
    z, x = qcore.PAULI_Z, qcore.PAULI_X
    start = qcore.MeasurementAssembly.from_observables([(z, x), (-(z + x) / np.sqrt(2), -(z - x) / np.sqrt(2))])
    r = op.seesaw(qcore.singlet_state(), wwzb.chsh(), SearchBudget(rng_seed=0, seesaw_restarts=1), initial=start)
    assert r.best_score == pytest.approx(np.sqrt(2), abs=1e-12)
    assert len(r.trace) == 2


def test_scan_finds_ghz_maximum():
    r = op.seesaw_scan(qcore.ghz_state(3), SMALL)
    assert r.best_score == pytest.approx(2.0, abs=1e-6)
    c = correlators_direct(qcore.ghz_state(3), r.assembly)
    assert wwzb.wwzb_score(r.inequality, c) == pytest.approx(2.0, abs=1e-6)


def test_closed_form_rejects_non_qubits():
    with pytest.raises(InvalidInputError):
        op.chsh_two_qubit_max(qcore.tiles_state())


def test_ansatz_contains_identity_first():
    filters = op.ansatz_filters((2, 2))
    assert np.allclose(filters[0].operators()[0], np.eye(4))
    assert len(filters) == 1 + 8 * len(op.ATTENUATIONS)


def test_filter_search_recovers_filtered_violation():
    s = noisy_partial_state()
    assert op.chsh_two_qubit_max(s) < 1
    t = op.ATTENUATIONS[-1]
    ansatz = qcore.SloMap.product_filter([np.diag([t, 1.0]), np.diag([1.0, t])])
    oracle = op.chsh_two_qubit_max(qcore.apply_slo(ansatz, s)[0])
    r = op.filter_search(s, 1, wwzb.chsh(), SearchBudget(rng_seed=2, seesaw_restarts=4, filter_candidates=40))
    assert oracle > 1.35
    assert r.best_score >= oracle - 1e-6
    assert r.best_score == pytest.approx(op.chsh_two_qubit_max(r.state), abs=1e-6)
    out, p = qcore.apply_slo(r.filter, s)
    assert p == pytest.approx(r.success_probability)
    assert op.score(out, r.assembly, wwzb.chsh()) == pytest.approx(r.best_score, abs=1e-9)


def test_filter_search_on_two_copies_reduces_to_qubits():
    r = op.filter_search(qcore.werner_state(0.9), 2, wwzb.chsh(), SMALL)
    assert r.state.dims == (2, 2)
    assert r.best_score >= op.chsh_two_qubit_max(qcore.werner_state(0.9)) - 1e-6


def test_filter_search_checks_party_count():
    with pytest.raises(InvalidInputError):
        op.filter_search(qcore.ghz_state(3), 1, wwzb.chsh(), SMALL)
