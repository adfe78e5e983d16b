"""Dense complex linear algebra, states, binary measurements and local filters."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from . import config
from .errors import (
    DegenerateProbabilityError,
    InvalidInputError,
    NotHermitianError,
    ResourceError,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


def as_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2:
        raise InvalidInputError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _scale(m: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(m, 2))) if m.size else 1.0


def is_hermitian(m: np.ndarray, tol: float | None = None) -> bool:
    tol = config.tol(tol)
    return m.shape[0] == m.shape[1] and np.linalg.norm(m - m.conj().T) <= tol * _scale(m)


def is_projector(m: np.ndarray, tol: float | None = None) -> bool:
    tol = config.tol(tol)
    return is_hermitian(m, tol) and np.linalg.norm(m @ m - m) <= tol * _scale(m)


def min_eigenvalue(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


def tensor_product(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats, np.ones((1, 1), dtype=complex))


def hermitian_eig(m, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching orthonormal eigenvector columns."""
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def ket(bits: str) -> np.ndarray:
    """Computational-basis qubit ket from a bit string, e.g. ``ket("01")``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


@dataclass(frozen=True)
class QuantumState:
    dims: tuple[int, ...]
    rho: np.ndarray
    tol: float | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidInputError(f"invalid local dimensions {self.dims}")
        rho = as_matrix(self.rho)
        size = int(np.prod(dims))
        if rho.shape != (size, size):
            raise InvalidInputError(f"rho has shape {rho.shape}, dims {dims} need {size}x{size}")
        tol = config.tol(self.tol)
        if not is_hermitian(rho, tol):
            raise InvalidInputError("rho is not Hermitian")
        rho = 0.5 * (rho + rho.conj().T)
        if abs(np.trace(rho).real - 1.0) > tol:
            raise InvalidInputError(f"trace(rho) = {np.trace(rho).real!r}, expected 1")
        if min_eigenvalue(rho) < -tol:
            raise InvalidInputError("rho is not positive semidefinite")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "rho", _frozen(rho))

    @property
    def parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @classmethod
    def from_ket(cls, psi, dims, tol=None) -> "QuantumState":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        psi = psi / np.linalg.norm(psi)
        return cls(tuple(dims), np.outer(psi, psi.conj()), tol)

    @classmethod
    def maximally_mixed(cls, dims) -> "QuantumState":
        size = int(np.prod(dims))
        return cls(tuple(dims), np.eye(size, dtype=complex) / size)

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))


def singlet_state() -> QuantumState:
    return QuantumState.from_ket((ket("01") - ket("10")) / np.sqrt(2), (2, 2))


def werner_state(p: float) -> QuantumState:
    """``p`` singlet plus ``1 - p`` white noise."""
    return QuantumState((2, 2), p * singlet_state().rho + (1 - p) * np.eye(4) / 4)


def ghz_state(n: int) -> QuantumState:
    return QuantumState.from_ket((ket("0" * n) + ket("1" * n)) / np.sqrt(2), (2,) * n)


@dataclass(frozen=True)
class BinaryPovm:
    """Two-outcome POVM; ``effect_1`` is outcome 1 (sign -1), ``effect_2`` outcome 2 (sign +1)."""

    effect_1: np.ndarray
    effect_2: np.ndarray
    tol: float | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        e1, e2 = as_matrix(self.effect_1), as_matrix(self.effect_2)
        if e1.shape != e2.shape or e1.shape[0] != e1.shape[1]:
            raise InvalidInputError("POVM effects must be square and of equal size")
        tol = config.tol(self.tol)
        for e in (e1, e2):
            if not is_hermitian(e, tol):
                raise InvalidInputError("POVM effect is not Hermitian")
            if min_eigenvalue(e) < -tol:
                raise InvalidInputError("POVM effect is not positive semidefinite")
        if np.linalg.norm(e1 + e2 - np.eye(e1.shape[0])) > tol * _scale(e1):
            raise InvalidInputError("POVM effects do not sum to the identity")
        object.__setattr__(self, "effect_1", _frozen(0.5 * (e1 + e1.conj().T)))
        object.__setattr__(self, "effect_2", _frozen(0.5 * (e2 + e2.conj().T)))

    @property
    def dim(self) -> int:
        return self.effect_1.shape[0]

    @property
    def observable(self) -> np.ndarray:
        return self.effect_2 - self.effect_1

    @classmethod
    def from_observable(cls, obs, tol=None) -> "BinaryPovm":
        obs = as_matrix(obs)
        eye = np.eye(obs.shape[0])
        return cls((eye - obs) / 2, (eye + obs) / 2, tol)

    @classmethod
    def from_projector(cls, proj, tol=None) -> "BinaryPovm":
        proj = as_matrix(proj)
        return cls(proj, np.eye(proj.shape[0]) - proj, tol)

    def is_projective(self, tol=None) -> bool:
        return is_projector(self.effect_1, tol)


@dataclass(frozen=True)
class MeasurementAssembly:
    """Per party, the binary POVMs for settings 1 and 2."""

    povms: tuple[tuple[BinaryPovm, BinaryPovm], ...]

    def __post_init__(self):
        povms = tuple(tuple(pair) for pair in self.povms)
        for pair in povms:
            if len(pair) != 2:
                raise InvalidInputError("each party needs exactly two settings")
            if pair[0].dim != pair[1].dim:
                raise InvalidInputError("settings of one party act on different dimensions")
        object.__setattr__(self, "povms", povms)

    @property
    def parties(self) -> int:
        return len(self.povms)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(pair[0].dim for pair in self.povms)

    @classmethod
    def from_observables(cls, observables, tol=None) -> "MeasurementAssembly":
        return cls(tuple((BinaryPovm.from_observable(o1, tol), BinaryPovm.from_observable(o2, tol))
                         for o1, o2 in observables))

    def check_state(self, state: QuantumState) -> None:
        if self.dims != state.dims:
            raise InvalidInputError(f"assembly dims {self.dims} do not match state dims {state.dims}")

    def is_projective(self, tol=None) -> bool:
        return all(p.is_projective(tol) for pair in self.povms for p in pair)

    def observables_array(self) -> np.ndarray:
        """Zero-padded ``(N, 2, dmax, dmax)`` stack of the +-1 observables."""
        dmax = max(self.dims)
        out = np.zeros((self.parties, 2, dmax, dmax), dtype=complex)
        for n, pair in enumerate(self.povms):
            for x, p in enumerate(pair):
                out[n, x, : p.dim, : p.dim] = p.observable
        return out

    def effects_array(self) -> np.ndarray:
        """Zero-padded ``(N, 4, dmax, dmax)`` stack; slot ``x + 2*a`` holds A(a|x) (0-based)."""
        dmax = max(self.dims)
        out = np.zeros((self.parties, 4, dmax, dmax), dtype=complex)
        for n, pair in enumerate(self.povms):
            for x, p in enumerate(pair):
                out[n, x, : p.dim, : p.dim] = p.effect_1
                out[n, x + 2, : p.dim, : p.dim] = p.effect_2
        return out

    def extended(self, extra_dims: Sequence[int]) -> "MeasurementAssembly":
        """Same measurements acting trivially on an appended local factor of size ``extra_dims[n]``."""
        pairs = []
        for pair, extra in zip(self.povms, extra_dims):
            eye = np.eye(extra)
            pairs.append(tuple(BinaryPovm(np.kron(p.effect_1, eye), np.kron(p.effect_2, eye)) for p in pair))
        return MeasurementAssembly(tuple(pairs))


@dataclass(frozen=True)
class SloMap:
    """Stochastic local operation: Kraus operators that factorize over the parties.

    ``kraus[k][n]`` is the factor of Kraus operator ``k`` acting on party ``n``
    (shape ``out_dims[n] x in_dims[n]``).
    """

    kraus: tuple[tuple[np.ndarray, ...], ...]
    tol: float | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.kraus:
            raise InvalidInputError("an SLO map needs at least one Kraus operator")
        kraus = tuple(tuple(_frozen(as_matrix(f)) for f in factors) for factors in self.kraus)
        shapes = [tuple(f.shape for f in factors) for factors in kraus]
        if any(s != shapes[0] for s in shapes):
            raise InvalidInputError("Kraus operators disagree on local dimensions")
        object.__setattr__(self, "kraus", kraus)
        total = sum(k.conj().T @ k for k in self.operators())
        tol = config.tol(self.tol)
        if float(np.linalg.eigvalsh(0.5 * (total + total.conj().T))[-1]) > 1 + tol:
            raise InvalidInputError("sum of K^dagger K exceeds the identity")

    @property
    def in_dims(self) -> tuple[int, ...]:
        return tuple(f.shape[1] for f in self.kraus[0])

    @property
    def out_dims(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.kraus[0])

    def operators(self) -> list[np.ndarray]:
        return [kron_all(factors) for factors in self.kraus]

    @classmethod
    def identity(cls, dims) -> "SloMap":
        return cls(((tuple(np.eye(d, dtype=complex) for d in dims)),))

    @classmethod
    def product_filter(cls, factors) -> "SloMap":
        return cls((tuple(factors),))

    def then(self, other: "SloMap") -> "SloMap":
        """Composition: apply ``self`` first, then ``other``."""
        kraus = tuple(tuple(b @ a for a, b in zip(ka, kb)) for ka in self.kraus for kb in other.kraus)
        return SloMap(kraus)

    def extended(self, extra_dims: Sequence[int]) -> "SloMap":
        """Act as the identity on an appended local factor of size ``extra_dims[n]``."""
        return SloMap(tuple(tuple(np.kron(f, np.eye(e)) for f, e in zip(factors, extra_dims))
                            for factors in self.kraus))


def tensor_power(state: QuantumState, m: int, dim_cap: int | None = None) -> QuantumState:
    """``m`` copies of ``state``, each party's copies grouped into one local system."""
    if m < 1:
        raise InvalidInputError("number of copies must be positive")
    cap = config.dim_cap(dim_cap)
    if state.dim**m > cap:
        raise ResourceError(f"{m} copies need dimension {state.dim ** m} > cap {cap}")
    if m == 1:
        return state
    n = state.parties
    big = reduce(np.kron, [state.rho] * m)
    tensor = big.reshape(state.dims * m * 2)
    # axis of (copy c, party p) is c*n + p for rows, offset by n*m for columns
    rows = [c * n + p for p in range(n) for c in range(m)]
    perm = rows + [n * m + a for a in rows]
    new_dims = tuple(d**m for d in state.dims)
    size = int(np.prod(new_dims))
    return QuantumState(new_dims, tensor.transpose(perm).reshape(size, size), state.tol)


def apply_slo(slo: SloMap, state: QuantumState, tol: float | None = None) -> tuple[QuantumState, float]:
    """Normalized post-selected state and success probability ``tr[Omega(rho)]``."""
    if slo.in_dims != state.dims:
        raise InvalidInputError(f"filter input dims {slo.in_dims} do not match state dims {state.dims}")
    tol = config.tol(tol)
    out = sum(k @ state.rho @ k.conj().T for k in slo.operators())
    prob = float(np.trace(out).real)
    if prob < tol:
        raise DegenerateProbabilityError(f"filter success probability {prob:.3g} below tolerance")
    return QuantumState(slo.out_dims, out / prob, state.tol), prob


def tiles_state() -> QuantumState:
    """3x3 PPT entangled state: normalized projector onto the complement of the Tiles UPB."""
    e = np.eye(3)
    s = 1 / np.sqrt(2)
    uniform = np.ones(3) / np.sqrt(3)
    vectors = [
        np.kron(e[0], s * (e[0] - e[1])),
        np.kron(s * (e[0] - e[1]), e[2]),
        np.kron(e[2], s * (e[1] - e[2])),
        np.kron(s * (e[1] - e[2]), e[0]),
        np.kron(uniform, uniform),
    ]
    proj = sum(np.outer(v, v) for v in vectors)
    return QuantumState((3, 3), (np.eye(9) - proj) / 4)
