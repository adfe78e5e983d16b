"""Joint distributions, Born-rule evaluation, correlators and local-model membership.

Index conventions: a settings tuple ``x`` (values 1, 2) and an outcomes tuple
``a`` (values 1, 2) are each encoded little-endian in party order, party 1
being the least significant bit, with bit = value - 1. Distributions are
stored as ``probs[x_index, a_index]``; the flat form used in JSON is
``x_index * 2**N + a_index``.

Local deterministic strategies are numbered ``0 .. 4**N - 1``; bits ``2n`` and
``2n + 1`` of the number give party ``n``'s outcome bit for settings 1 and 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, sparse

from . import _kernels, config
from .errors import InvalidInputError, ResourceError
from .qcore import MeasurementAssembly, QuantumState

MAX_LP_PARTIES = 8


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def outcome_signs(n: int) -> np.ndarray:
    """``prod_k (-1)^{a_k}`` for every outcome index: outcome 1 gives -1, outcome 2 gives +1."""
    a = np.arange(2**n)
    signs = np.ones(2**n)
    for k in range(n):
        signs *= 2 * ((a >> k) & 1) - 1
    return _frozen(signs)


@lru_cache(maxsize=None)
def strategy_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Correlators ``(4**n, 2**n)`` and outcome indices of every deterministic strategy."""
    corr, index = _kernels.strategy_tables(n)
    index = np.ascontiguousarray(index)
    index.setflags(write=False)
    return _frozen(corr), index


def settings_tuple(index: int, n: int) -> tuple[int, ...]:
    return tuple(((index >> k) & 1) + 1 for k in range(n))


def settings_index(values) -> int:
    return sum((int(v) - 1) << k for k, v in enumerate(values))


@dataclass(frozen=True)
class Scenario:
    parties: int
    settings: int = 2
    outcomes: int = 2

    def __post_init__(self):
        if self.parties < 1:
            raise InvalidInputError("a scenario needs at least one party")
        if self.settings != 2 or self.outcomes != 2:
            raise InvalidInputError("only two settings with two outcomes per party are supported")


@dataclass(frozen=True)
class JointDistribution:
    parties: int
    probs: np.ndarray
    tol: float | None = None

    def __post_init__(self):
        n = int(self.parties)
        Scenario(n)
        size = 2**n
        probs = np.asarray(self.probs, dtype=float)
        if probs.size != size * size:
            raise InvalidInputError(f"{n} parties need {size * size} probabilities, got {probs.size}")
        probs = probs.reshape(size, size)
        tol = config.tol(self.tol)
        if probs.min() < -tol:
            raise InvalidInputError("negative probability")
        if np.max(np.abs(probs.sum(axis=1) - 1)) > tol:
            raise InvalidInputError("probabilities do not sum to one for some setting")
        for k in range(n):
            if any(np.max(np.abs(m - m[0])) > tol for m in _party_marginals(probs, n, k)):
                raise InvalidInputError(f"party {k + 1}'s marginal depends on other parties' settings")
        object.__setattr__(self, "parties", n)
        object.__setattr__(self, "probs", _frozen(probs))

    @property
    def flat(self) -> np.ndarray:
        return self.probs.reshape(-1)


def _party_marginals(probs, n, k):
    """Party ``k``'s outcome marginals, grouped by its own setting: one ``(2**(n-1), 2)`` block each."""
    bits = (np.arange(2**n) >> k) & 1
    marg = np.stack([probs[:, bits == b].sum(axis=1) for b in (0, 1)], axis=1)
    return [marg[bits == s] for s in (0, 1)]


@dataclass(frozen=True)
class CorrelationTensor:
    parties: int
    values: np.ndarray
    tol: float | None = None

    def __post_init__(self):
        n = int(self.parties)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.size != 2**n:
            raise InvalidInputError(f"{n} parties need {2 ** n} correlators, got {values.size}")
        if np.max(np.abs(values)) > 1 + config.tol(self.tol):
            raise InvalidInputError("correlator outside [-1, 1]")
        object.__setattr__(self, "parties", n)
        object.__setattr__(self, "values", _frozen(values))


@dataclass(frozen=True)
class LvmModel:
    """Mixture of deterministic strategies; ``weights[s]`` is the weight of strategy ``s``."""

    parties: int
    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if weights.size != 4**self.parties:
            raise InvalidInputError("one weight per deterministic strategy is required")
        if weights.min() < -config.tol() or abs(weights.sum() - 1) > config.tol():
            raise InvalidInputError("strategy weights must form a probability vector")
        object.__setattr__(self, "weights", _frozen(weights))

    def distribution(self) -> JointDistribution:
        n = self.parties
        _, index = strategy_tables(n)
        size = 2**n
        probs = np.zeros((size, size))
        cols = np.arange(size)
        for s in np.flatnonzero(self.weights):
            probs[cols, index[s]] += self.weights[s]
        return JointDistribution(n, probs)


@dataclass(frozen=True)
class BellFunctional:
    """Coefficient table ``beta(a|x)``; local models satisfy ``beta[P] >= 0``."""

    parties: int
    coeffs: np.ndarray

    def __post_init__(self):
        size = 2**self.parties
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.size != size * size:
            raise InvalidInputError(f"{self.parties} parties need {size * size} coefficients")
        object.__setattr__(self, "coeffs", _frozen(coeffs.reshape(size, size)))

    def deterministic_slacks(self) -> np.ndarray:
        _, index = strategy_tables(self.parties)
        return self.coeffs[np.arange(2**self.parties), index].sum(axis=1)


def deterministic_distribution(n: int, strategy: int) -> JointDistribution:
    weights = np.zeros(4**n)
    weights[strategy] = 1.0
    return LvmModel(n, weights).distribution()


def born_distribution(state: QuantumState, assembly: MeasurementAssembly) -> JointDistribution:
    """``P(a|x) = tr[rho (x)_n A_n(a_n|x_n)]``."""
    assembly.check_state(state)
    n = state.parties
    flat = _kernels.product_expectations(
        np.ascontiguousarray(state.rho), np.asarray(state.dims, dtype=np.int64), assembly.effects_array()
    )
    # flat slot per party is x + 2a; regroup into (x_N..x_1, a_N..a_1)
    tensor = flat.real.reshape((2, 2) * n)
    perm = [2 * k + 1 for k in range(n)] + [2 * k for k in range(n)]
    probs = tensor.transpose(perm).reshape(2**n, 2**n)
    return JointDistribution(n, probs, state.tol)


def correlators(dist: JointDistribution) -> CorrelationTensor:
    return CorrelationTensor(dist.parties, dist.probs @ outcome_signs(dist.parties))


def correlators_direct(state: QuantumState, assembly: MeasurementAssembly) -> CorrelationTensor:
    """``C(x) = tr[rho (x)_n (A_n(2|x_n) - A_n(1|x_n))]`` without building the distribution."""
    assembly.check_state(state)
    flat = _kernels.product_expectations(
        np.ascontiguousarray(state.rho), np.asarray(state.dims, dtype=np.int64), assembly.observables_array()
    )
    return CorrelationTensor(state.parties, flat.real)


def bell_value(functional: BellFunctional, dist: JointDistribution) -> float:
    if functional.parties != dist.parties:
        raise InvalidInputError("functional and distribution have different party counts")
    return float(np.sum(functional.coeffs * dist.probs))


def _constraint_matrix(n):
    _, index = strategy_tables(n)
    size = 2**n
    ns = 4**n
    rows = (np.arange(size)[None, :] * size + index).reshape(-1)
    cols = np.repeat(np.arange(ns), size)
    return sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(size * size, ns))


def lvm_feasibility(dist: JointDistribution, lp_tol: float | None = None):
    """Local model reproducing ``dist``, or a separating :class:`BellFunctional`.

    The separating functional is shifted so that its minimum over deterministic
    strategies is exactly zero, and it is negative at ``dist``.
    """
    n = dist.parties
    if n > MAX_LP_PARTIES:
        raise ResourceError(f"local-model LP limited to {MAX_LP_PARTIES} parties")
    lp_tol = config.lp_tol(lp_tol)
    target = dist.flat
    mat = _constraint_matrix(n)
    rows, ns = mat.shape

    # min ||M p - P||_1 over the simplex
    eye = sparse.identity(rows, format="csr")
    a_eq = sparse.vstack([
        sparse.hstack([mat, eye, -eye]),
        sparse.hstack([sparse.csr_matrix(np.ones((1, ns))), sparse.csr_matrix((1, 2 * rows))]),
    ]).tocsc()
    cost = np.concatenate([np.zeros(ns), np.ones(2 * rows)])
    res = optimize.linprog(cost, A_eq=a_eq, b_eq=np.concatenate([target, [1.0]]),
                           bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"local-model LP failed: {res.message}")
    weights = np.clip(res.x[:ns], 0, None)
    weights /= weights.sum()
    if np.max(np.abs(mat @ weights - target)) <= lp_tol:
        return LvmModel(n, weights)

    # separating functional: min beta.P subject to beta[D_s] >= 0, |beta| <= 1
    res = optimize.linprog(target, A_ub=-mat.T.tocsr(), b_ub=np.zeros(ns),
                           bounds=(-1, 1), method="highs")
    if res.status != 0:
        raise RuntimeError(f"separating LP failed: {res.message}")
    beta = res.x.reshape(2**n, 2**n)
    functional = BellFunctional(n, beta)
    shift = functional.deterministic_slacks().min()
    functional = BellFunctional(n, beta - shift / 2**n)
    if bell_value(functional, dist) >= -lp_tol:
        raise RuntimeError("LP results are inconsistent: no model found and no separation")
    return functional
