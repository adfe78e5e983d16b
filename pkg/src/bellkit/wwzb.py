"""Full-correlation two-setting Bell inequalities (the WWZB family).

An inequality is a sign function ``eps`` on ``{0,1}^N``; its correlator weights
are ``g(x) = sum_r eps(r) (-1)^{<r, x-1>}`` and its normalized score is
``2^-N |sum_x g(x) C(x)|``, bounded by 1 for local models. Bit strings index
``r`` little-endian in party order; character ``'0'`` means ``eps(r) = +1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _kernels, config
from .correlations import BellFunctional, CorrelationTensor, outcome_signs
from .errors import InvalidInputError, NoCertificateError, ResourceError
from .qcore import MeasurementAssembly, SloMap

MAX_ENUMERATION_PARTIES = 4


def walsh_hadamard(values) -> np.ndarray:
    return _kernels.walsh_hadamard(np.ascontiguousarray(values, dtype=float))


def quantum_bound(n: int) -> float:
    return 2 ** ((n - 1) / 2)


def check_quantum_bound(score: float, n: int, tol: float = 1e-6) -> bool:
    """Soft sanity check against the known quantum maximum; warns instead of failing."""
    ok = score <= quantum_bound(n) + tol
    if not ok:
        warnings.warn(f"score {score:.12g} exceeds the quantum bound {quantum_bound(n):.12g}", RuntimeWarning)
    return ok


@dataclass(frozen=True, eq=False)
class WwzbInequality:
    parties: int
    epsilon: np.ndarray
    g: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.parties)
        if n < 1:
            raise InvalidInputError("an inequality needs at least one party")
        eps = np.asarray(self.epsilon).reshape(-1).astype(np.int64)
        if eps.size != 2**n or not np.all(np.abs(eps) == 1):
            raise InvalidInputError(f"epsilon must be {2 ** n} signs of +-1")
        g = np.rint(walsh_hadamard(eps)).astype(np.int64)
        eps.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "parties", n)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "g", g)

    @classmethod
    def from_bitstring(cls, n: int, bits: str) -> "WwzbInequality":
        if len(bits) != 2**n or set(bits) - {"0", "1"}:
            raise InvalidInputError(f"epsilon bit string must have {2 ** n} characters of 0/1")
        return cls(n, np.array([1 if b == "0" else -1 for b in bits]))

    @classmethod
    def from_index(cls, n: int, k: int) -> "WwzbInequality":
        r = np.arange(2**n)
        return cls(n, 1 - 2 * ((k >> r) & 1))

    @property
    def bitstring(self) -> str:
        return "".join("0" if e > 0 else "1" for e in self.epsilon)

    def __eq__(self, other):
        if not isinstance(other, WwzbInequality):
            return NotImplemented
        return self.parties == other.parties and self.bitstring == other.bitstring

    def __hash__(self):
        return hash((self.parties, self.bitstring))

    def signed_score(self, c: CorrelationTensor) -> float:
        if c.parties != self.parties:
            raise InvalidInputError("correlation tensor has a different party count")
        return float(self.g @ c.values) / 2**self.parties


def enumerate_wwzb(n: int) -> Iterator[WwzbInequality]:
    """All ``2**(2**n)`` sign functions, in the order of :meth:`WwzbInequality.from_index`."""
    if n < 1 or n > MAX_ENUMERATION_PARTIES:
        raise ResourceError(f"full enumeration supported for 1..{MAX_ENUMERATION_PARTIES} parties")
    for k in range(2 ** (2**n)):
        yield WwzbInequality.from_index(n, k)


def family_weights(n: int) -> np.ndarray:
    """Stacked ``g`` vectors of the whole family, shape ``(2**(2**n), 2**n)``."""
    return np.array([ineq.g for ineq in enumerate_wwzb(n)], dtype=float)


def chsh() -> WwzbInequality:
    """``score = |C(1,1) + C(1,2) + C(2,1) - C(2,2)| / 2``."""
    return WwzbInequality(2, np.array([1, 1, 1, -1]))


def wwzb_score(ineq: WwzbInequality, c: CorrelationTensor) -> float:
    return abs(ineq.signed_score(c))


@dataclass(frozen=True)
class FourierSpectrum:
    parties: int
    xi: np.ndarray

    def inverse(self) -> np.ndarray:
        return walsh_hadamard(self.xi)

    def total(self) -> float:
        """``sum_r |xi(r)|``: the best score over the family; at most 1 for local correlators."""
        return float(np.abs(self.xi).sum())

    def best_inequality(self) -> WwzbInequality:
        return WwzbInequality(self.parties, np.where(self.xi >= 0, 1, -1))


def fourier_spectrum(c: CorrelationTensor) -> FourierSpectrum:
    xi = walsh_hadamard(c.values) / 2**c.parties
    xi.setflags(write=False)
    return FourierSpectrum(c.parties, xi)


def group_size_bound(n: int, score: float, tol: float | None = None) -> int:
    """Integer ``G`` with ``2^((n-G-1)/2) < score <= 2^((n-G)/2)``."""
    tol = config.tol(tol)
    if n < 2:
        raise InvalidInputError("group sizes need at least two parties")
    if not score > 1 + tol:
        raise NoCertificateError(f"score {score!r} does not exceed the local bound 1")
    # slack absorbs rounding when score sits exactly on an interval edge
    g = math.floor(n - 2 * math.log2(score) + 1e-12)
    if g < 1:
        if score <= quantum_bound(n) * (1 + 1e-6):
            check_quantum_bound(score, n)
            return 1
        raise InvalidInputError(f"score {score!r} exceeds the quantum bound for {n} parties")
    return min(g, n - 1)


def to_coefficient_table(ineq: WwzbInequality, sign: int) -> BellFunctional:
    """Coefficients with ``beta[P] = 2^N (1 - sign * s(P))`` where ``s`` is the signed score."""
    if sign not in (1, -1):
        raise InvalidInputError("sign must be +1 or -1")
    n = ineq.parties
    coeffs = 1.0 - sign * np.outer(ineq.g, outcome_signs(n))
    return BellFunctional(n, coeffs)


@dataclass(frozen=True)
class DistillabilityCertificate:
    """Witness that ``copies`` copies of a state violate ``inequality`` after ``filter``."""

    parties: int
    copies: int
    score: float
    group_size: int
    inequality: WwzbInequality
    filter: SloMap
    assembly: MeasurementAssembly
    seed: int | None = None

    def __post_init__(self):
        n, g, s = self.parties, self.group_size, self.score
        if not s > 1:
            raise InvalidInputError("certificate score must exceed 1")
        if n >= 2 and not 1 <= g <= n - 1:
            raise InvalidInputError("group size out of range")
        lo, hi = 2 ** ((n - g - 1) / 2), 2 ** ((n - g) / 2)
        if not (lo < s <= hi * (1 + 1e-9) or (g == 1 and s <= quantum_bound(n) * (1 + 1e-6))):
            raise InvalidInputError(f"score {s!r} outside the interval for group size {g}")
