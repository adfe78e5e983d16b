"""LOCC embedding of a successful filter branch and the distillability certificate pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import config
from .correlations import (
    BellFunctional,
    JointDistribution,
    born_distribution,
    correlators_direct,
    deterministic_distribution,
)
from .errors import BranchNotViolatingError, InvalidInputError, NoSaturatingPointError
from .optimize import OptimizationReport, SearchBudget, filter_search
from .qcore import (
    BinaryPovm,
    MeasurementAssembly,
    QuantumState,
    SloMap,
    apply_slo,
    kron_all,
    tensor_power,
)
from .wwzb import DistillabilityCertificate, WwzbInequality, group_size_bound, to_coefficient_table, wwzb_score

REGISTER_DIM = 4


@dataclass(frozen=True)
class SaturatingRealization:
    strategy: int
    distribution: JointDistribution
    state: QuantumState
    assembly: MeasurementAssembly


def _strategy_key(strategy: int, n: int) -> tuple[int, ...]:
    # party 1 setting 1 is the most significant position
    return tuple((strategy >> (2 * k + x)) & 1 for k in range(n) for x in range(2))


def saturating_strategy(functional: BellFunctional, tol: float | None = None) -> int:
    """Lexicographically first deterministic strategy with zero slack."""
    tol = config.tol(tol)
    slacks = functional.deterministic_slacks()
    if slacks.min() < -tol:
        raise InvalidInputError("functional is negative on a deterministic strategy")
    hits = np.flatnonzero(np.abs(slacks) <= tol)
    if hits.size == 0:
        raise NoSaturatingPointError("no deterministic strategy saturates the functional")
    return int(min(hits, key=lambda s: _strategy_key(int(s), functional.parties)))


def _register_assembly(strategy: int, n: int) -> tuple[QuantumState, MeasurementAssembly]:
    """Product of classical registers holding each party's local function, read out by diagonal effects."""
    mu = np.arange(REGISTER_DIM)
    kets, pairs = [], []
    for k in range(n):
        local = (strategy >> (2 * k)) & 3
        v = np.zeros(REGISTER_DIM, dtype=complex)
        v[local] = 1
        kets.append(np.outer(v, v))
        pairs.append(tuple(BinaryPovm.from_projector(np.diag(((mu >> x) & 1) == 0).astype(complex))
                           for x in range(2)))
    return QuantumState((REGISTER_DIM,) * n, kron_all(kets)), MeasurementAssembly(tuple(pairs))


def saturating_realization(ineq, sign: int = 1, tol: float | None = None) -> SaturatingRealization:
    """Separable state and diagonal measurements reproducing a saturating local point.

    ``ineq`` is a :class:`WwzbInequality` (converted with ``sign``) or a
    :class:`BellFunctional` in the slack convention.
    """
    functional = to_coefficient_table(ineq, sign) if isinstance(ineq, WwzbInequality) else ineq
    n = functional.parties
    strategy = saturating_strategy(functional, tol)
    state, assembly = _register_assembly(strategy, n)
    return SaturatingRealization(strategy, deterministic_distribution(n, strategy), state, assembly)


@dataclass(frozen=True)
class LoccEmbedding:
    state: QuantumState
    assembly: MeasurementAssembly
    success_probability: float
    branch_score: float
    embedded_score: float

    @property
    def predicted_score(self) -> float:
        p = self.success_probability
        return p * self.branch_score + (1 - p)


def _embed(d: int, size: int) -> np.ndarray:
    j = np.zeros((size, d), dtype=complex)
    j[:d, :d] = np.eye(d)
    return j


def _padded_povm(povm: BinaryPovm, j: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # unused slots answer outcome 1
    rest = np.eye(j.shape[0]) - j @ j.conj().T
    return j @ povm.effect_1 @ j.conj().T + rest, j @ povm.effect_2 @ j.conj().T


def locc_embedding(state: QuantumState, slo: SloMap, assembly: MeasurementAssembly,
                   ineq: WwzbInequality, sign: int = 1, tol: float | None = None) -> LoccEmbedding:
    """Deterministic protocol: filter branch tagged by ancilla 0, saturating local point by ancilla 1."""
    tol = config.tol(tol)
    branch, prob = apply_slo(slo, state, tol)
    assembly.check_state(branch)
    s1 = sign * ineq.signed_score(correlators_direct(branch, assembly))
    if s1 <= 1 + tol:
        raise BranchNotViolatingError(f"filtered branch score {s1!r} does not exceed 1")
    sat = saturating_realization(ineq, sign, tol)

    e0, e1 = np.array([[1], [0]], dtype=complex), np.array([[0], [1]], dtype=complex)
    v0, v1, pairs = [], [], []
    for n, d in enumerate(branch.dims):
        size = max(d, REGISTER_DIM)
        j, r = _embed(d, size), _embed(REGISTER_DIM, size)
        v0.append(np.kron(j, e0))
        v1.append(np.kron(r, e1))
        p0, p1 = np.outer(e0, e0), np.outer(e1, e1)
        pair = []
        for x in range(2):
            a1, a2 = _padded_povm(assembly.povms[n][x], j)
            b1, b2 = _padded_povm(sat.assembly.povms[n][x], r)
            pair.append(BinaryPovm(np.kron(a1, p0) + np.kron(b1, p1), np.kron(a2, p0) + np.kron(b2, p1)))
        pairs.append(tuple(pair))
    big0, big1 = kron_all(v0), kron_all(v1)
    rho = prob * big0 @ branch.rho @ big0.conj().T + (1 - prob) * big1 @ sat.state.rho @ big1.conj().T
    dims = tuple(2 * max(d, REGISTER_DIM) for d in branch.dims)
    embedded = QuantumState(dims, rho, state.tol)
    embedded_assembly = MeasurementAssembly(tuple(pairs))
    score = sign * ineq.signed_score(correlators_direct(embedded, embedded_assembly))
    return LoccEmbedding(embedded, embedded_assembly, prob, s1, score)


@dataclass(frozen=True)
class NoCertificate:
    """Search ended without a violation; this is not a claim of undistillability."""

    copies: int
    best_score: float
    report: OptimizationReport


def witness_score(state: QuantumState, copies: int, slo: SloMap, assembly: MeasurementAssembly,
                  ineq: WwzbInequality, dim_cap: int | None = None) -> float:
    """Re-evaluate a witness from scratch: copies, filter, Born rule, correlators, score."""
    filtered, _ = apply_slo(slo, tensor_power(state, copies, dim_cap))
    assembly.check_state(filtered)
    return wwzb_score(ineq, correlators_direct(filtered, assembly))


def _extend(report: OptimizationReport, state: QuantumState):
    extra = state.dims
    return report.filter.extended(extra), report.assembly.extended(extra)


def certify_distillability(state: QuantumState, copies: int, ineq, budget: SearchBudget,
                           dim_cap: int | None = None, tol: float | None = None):
    """Search filters on 1..``copies`` copies; certificate if the best score exceeds 1.

    Each copy count seeds its search with the previous witness acting trivially
    on the extra copy, so scores never decrease with ``copies``.
    """
    tol = config.tol(tol)
    if state.parties < 2:
        raise InvalidInputError("certification needs at least two parties")
    if copies < 1:
        raise InvalidInputError("number of copies must be positive")
    tensor_power(state, copies, dim_cap)  # fail fast on the size cap
    report = None
    for k in range(1, copies + 1):
        warm = []
        if report is not None and report.filter is not None:
            warm.append(_extend(report, state))
        report = filter_search(state, k, ineq, budget, warm_starts=warm, dim_cap=dim_cap, tol=tol)
    if report.assembly is None or report.best_score <= 1 + tol:
        return NoCertificate(copies, report.best_score, report)
    score = witness_score(state, copies, report.filter, report.assembly, report.inequality, dim_cap)
    if score <= 1 + tol:
        return NoCertificate(copies, score, report)
    return DistillabilityCertificate(state.parties, copies, score, group_size_bound(state.parties, score, tol),
                                     report.inequality, report.filter, report.assembly, budget.rng_seed)


@dataclass(frozen=True)
class Verification:
    ok: bool
    score: float
    group_size: int | None
    messages: tuple[str, ...]


def verify_certificate(cert: DistillabilityCertificate, state: QuantumState,
                       score_tol: float = 1e-9, dim_cap: int | None = None) -> Verification:
    messages = []
    if state.parties != cert.parties:
        return Verification(False, float("nan"), None, ("party count mismatch",))
    score = witness_score(state, cert.copies, cert.filter, cert.assembly, cert.inequality, dim_cap)
    if abs(score - cert.score) > score_tol:
        messages.append(f"re-evaluated score {score!r} differs from stored {cert.score!r}")
    group = None
    if score > 1 + config.tol():
        group = group_size_bound(cert.parties, score)
        if group != cert.group_size:
            messages.append(f"group size {group} differs from stored {cert.group_size}")
    else:
        messages.append("re-evaluated score does not exceed 1")
    return Verification(not messages, score, group, tuple(messages))


def born_check(real: SaturatingRealization) -> float:
    """Largest deviation between the realization's Born distribution and its target point."""
    return float(np.max(np.abs(born_distribution(real.state, real.assembly).probs - real.distribution.probs)))
