"""Seesaw maximization of WWZB scores and the local-filter search over copies."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, config
from .correlations import CorrelationTensor, correlators_direct
from .errors import DegenerateProbabilityError, InvalidInputError
from .jordan import best_block, qubit_reduce
from .qcore import PAULIS, MeasurementAssembly, QuantumState, SloMap, apply_slo, tensor_power
from .wwzb import WwzbInequality, check_quantum_bound, fourier_spectrum, wwzb_score

ATTENUATIONS = (0.5, 0.2, 0.1, 0.05)


@dataclass(frozen=True)
class SearchBudget:
    rng_seed: int
    seesaw_restarts: int = 20
    seesaw_sweep_limit: int = 500
    filter_candidates: int = 200
    convergence_eps: float = 1e-10

    def __post_init__(self):
        if min(self.seesaw_restarts, self.seesaw_sweep_limit, self.filter_candidates) < 1:
            raise InvalidInputError("budget counts must be at least 1")
        if not self.convergence_eps > 0:
            raise InvalidInputError("convergence_eps must be positive")


@dataclass(frozen=True)
class OptimizationReport:
    best_score: float
    assembly: MeasurementAssembly | None
    inequality: WwzbInequality | None
    filter: SloMap | None = None
    state: QuantumState | None = field(default=None, repr=False)
    success_probability: float = 1.0
    iterations: int = 0
    converged: bool = False
    trace: tuple[float, ...] = ()
    candidate: int = 0


def _random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _observable(vecs, rank):
    d = vecs.shape[0]
    top = vecs[:, d - rank :]
    return 2 * top @ top.conj().T - np.eye(d)


def _plus_rank(obs):
    return int(np.sum(np.linalg.eigvalsh(obs) > 0))


def _initial_observables(rng, dims, dmax):
    obs = np.zeros((len(dims), 2, dmax, dmax), dtype=complex)
    for n, d in enumerate(dims):
        for x in range(2):
            obs[n, x, :d, :d] = _observable(_random_unitary(rng, d), d // 2)
    return obs


def _ascend(rho, dims, g, obs, ranks, limit, eps):
    trace, converged, sweeps = _kernels.ascend(
        rho, np.asarray(dims, dtype=np.int64), obs, g, ranks, limit, eps
    )
    return [float(v) for v in trace], bool(converged), int(sweeps)


def _correlators(rho, dims, obs):
    return _kernels.product_expectations(rho, np.asarray(dims, dtype=np.int64), obs).real


def _assembly(obs, dims):
    return MeasurementAssembly.from_observables(
        [(obs[n, 0, :d, :d], obs[n, 1, :d, :d]) for n, d in enumerate(dims)]
    )


def _start(state, initial, rng, free_rank):
    dims = state.dims
    dmax = max(dims)
    if initial is not None:
        initial.check_state(state)
        obs = initial.observables_array()
    else:
        obs = _initial_observables(rng, dims, dmax)
    ranks = np.full((len(dims), 2), -1, dtype=np.int64)
    if not free_rank:
        for n, d in enumerate(dims):
            for x in range(2):
                ranks[n, x] = _plus_rank(obs[n, x, :d, :d])
    return obs, ranks


def seesaw(state: QuantumState, ineq: WwzbInequality, budget: SearchBudget,
           initial: MeasurementAssembly | None = None, rng: np.random.Generator | None = None,
           free_rank: bool = False) -> OptimizationReport:
    """Alternating maximization of the signed score over projective +-1 observables.

    Each party update is the exact conditional optimum. By default every
    observable keeps the +1 multiplicity it started with (half the local
    dimension for random starts, i.e. traceless qubit observables);
    ``free_rank=True`` lets each update pick the full nonnegative eigenspace.
    ``initial``, when given, replaces the first random restart.
    """
    if ineq.parties != state.parties:
        raise InvalidInputError("inequality and state have different party counts")
    rng = np.random.default_rng(budget.rng_seed) if rng is None else rng
    rho = np.ascontiguousarray(state.rho)
    g = ineq.g.astype(float)
    best = None
    total = 0
    for r in range(budget.seesaw_restarts):
        obs, ranks = _start(state, initial if r == 0 else None, rng, free_rank)
        trace, converged, sweeps = _ascend(rho, state.dims, g, obs, ranks,
                                           budget.seesaw_sweep_limit, budget.convergence_eps)
        total += sweeps
        if best is None or trace[-1] > best[0][-1]:
            best = (trace, converged, obs.copy())
    trace, converged, obs = best
    score = abs(trace[-1])
    check_quantum_bound(score, state.parties)
    return OptimizationReport(score, _assembly(obs, state.dims), ineq, state=state, iterations=total,
                              converged=converged, trace=tuple(trace))


def seesaw_scan(state: QuantumState, budget: SearchBudget, initial: MeasurementAssembly | None = None,
                rng: np.random.Generator | None = None, free_rank: bool = False,
                max_rounds: int = 50) -> OptimizationReport:
    """Seesaw that also re-picks the family member best matching the current correlators."""
    rng = np.random.default_rng(budget.rng_seed) if rng is None else rng
    n = state.parties
    rho = np.ascontiguousarray(state.rho)
    best = None
    total = 0
    for r in range(budget.seesaw_restarts):
        obs, ranks = _start(state, initial if r == 0 else None, rng, free_rank)
        if r == 0 and initial is not None:
            ineq = fourier_spectrum(correlators_direct(state, initial)).best_inequality()
        else:
            ineq = WwzbInequality(n, rng.choice([-1, 1], size=2**n))
        trace = []
        for _ in range(max_rounds):
            part, converged, sweeps = _ascend(rho, state.dims, ineq.g.astype(float), obs, ranks,
                                              budget.seesaw_sweep_limit, budget.convergence_eps)
            total += sweeps
            trace.extend(part if not trace else part[1:])
            spectrum = fourier_spectrum(CorrelationTensor(n, _correlators(rho, state.dims, obs)))
            if spectrum.total() - trace[-1] < budget.convergence_eps:
                break
            ineq = spectrum.best_inequality()
            trace.append(spectrum.total())
        if best is None or trace[-1] > best[0][-1]:
            best = (trace, converged, obs.copy(), ineq)
    trace, converged, obs, ineq = best
    score = abs(trace[-1])
    check_quantum_bound(score, n)
    return OptimizationReport(score, _assembly(obs, state.dims), ineq, state=state, iterations=total,
                              converged=converged, trace=tuple(trace))


def chsh_two_qubit_max(state: QuantumState) -> float:
    """Closed-form CHSH optimum over traceless qubit observables, normalized to local bound 1."""
    if state.dims != (2, 2):
        raise InvalidInputError("closed-form CHSH value needs a two-qubit state")
    t = np.array([[np.trace(state.rho @ np.kron(a, b)).real for b in PAULIS] for a in PAULIS])
    m = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return float(np.sqrt(max(m[0] + m[1], 0.0)))


def _diag_filter(d, slot, t):
    f = np.eye(d, dtype=complex)
    if slot is not None:
        f[slot, slot] = t
    return f


def ansatz_filters(dims) -> list[SloMap]:
    """Deterministic candidates: identity, qubit-subspace projections, basis attenuations."""
    out = [SloMap.identity(dims)]
    small = min(dims)
    if small > 2:
        for i, j in itertools.combinations(range(min(small, 4)), 2):
            factors = []
            for d in dims:
                f = np.zeros((d, d), dtype=complex)
                f[i, i] = f[j, j] = 1
                factors.append(f)
            out.append(SloMap.product_filter(factors))
    if len(dims) <= 2:
        patterns = itertools.product(*[(None, 0, d - 1) for d in dims])
    else:
        patterns = [tuple(0 for _ in dims), tuple(d - 1 for d in dims)]
    for pattern in patterns:
        if all(s is None for s in pattern):
            continue
        for t in ATTENUATIONS:
            out.append(SloMap.product_filter([_diag_filter(d, s, t) for d, s in zip(dims, pattern)]))
    return out


def random_filter(rng, dims) -> SloMap:
    """Lower-triangular complex Gaussian factors scaled to unit spectral norm."""
    factors = []
    for d in dims:
        f = np.tril(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        factors.append(f / np.linalg.norm(f, 2))
    return SloMap.product_filter(factors)


def _optimize(state, ineq, budget, initial, rng):
    if ineq == "scan":
        return seesaw_scan(state, budget, initial, rng)
    return seesaw(state, ineq, budget, initial, rng)


def _reduce_to_qubits(report, ineq, budget, rng):
    """Project onto the best qubit block of the optimized assembly, then re-optimize there."""
    reduction = qubit_reduce(report.state, report.assembly)
    index, _ = best_block(reduction, report.inequality)
    comp = reduction.components[index]
    sub = _optimize(comp.state, ineq, budget, comp.assembly, rng)
    return sub, reduction.component_filter(index)


def filter_search(state: QuantumState, copies: int, ineq, budget: SearchBudget,
                  warm_starts=(), extra_filters=(), dim_cap: int | None = None,
                  tol: float | None = None) -> OptimizationReport:
    """Search product filters on ``copies`` copies of ``state`` for the largest score.

    ``ineq`` is a :class:`WwzbInequality` or the string ``"scan"``. Candidate
    order: identity, ``warm_starts`` (pairs of filter and starting assembly),
    ``extra_filters``, the deterministic ansatz list, then seeded random
    filters up to ``budget.filter_candidates``. Ties keep the lowest index.
    """
    tol = config.tol(tol)
    if ineq != "scan" and ineq.parties != state.parties:
        raise InvalidInputError("inequality and state have different party counts")
    rng = np.random.default_rng(budget.rng_seed)
    big = tensor_power(state, copies, dim_cap)
    ansatz = ansatz_filters(big.dims)
    candidates = [(ansatz[0], None)]
    candidates += [(f, a) for f, a in warm_starts]
    candidates += [(f, None) for f in extra_filters]
    candidates += [(f, None) for f in ansatz[1:]]
    candidates = candidates[: max(budget.filter_candidates, 1 + len(warm_starts) + len(extra_filters))]
    while len(candidates) < budget.filter_candidates:
        candidates.append((random_filter(rng, big.dims), None))

    best = None
    total = 0
    for index, (flt, initial) in enumerate(candidates):
        try:
            filtered, prob = apply_slo(flt, big, tol)
        except DegenerateProbabilityError:
            continue
        report = _optimize(filtered, ineq, budget, initial, rng)
        total += report.iterations
        options = [(report, flt)]
        if max(filtered.dims) > 2:
            sub, proj = _reduce_to_qubits(report, ineq, budget, rng)
            total += sub.iterations
            options.append((sub, flt.then(proj)))
        for rep, composite in options:
            if best is None or rep.best_score > best[0].best_score:
                best = (rep, composite, index)
    if best is None:
        return OptimizationReport(0.0, None, None if ineq == "scan" else ineq, converged=False)
    rep, composite, index = best
    final, prob = apply_slo(composite, big, tol)
    return OptimizationReport(rep.best_score, rep.assembly, rep.inequality, composite, final, prob,
                              total, rep.converged, rep.trace, index)


def signed_score(state: QuantumState, assembly: MeasurementAssembly, ineq: WwzbInequality) -> float:
    return ineq.signed_score(correlators_direct(state, assembly))


def score(state: QuantumState, assembly: MeasurementAssembly, ineq: WwzbInequality) -> float:
    return wwzb_score(ineq, correlators_direct(state, assembly))
