"""Simultaneous block-diagonalization of two binary projective measurements.

Two projectors ``A1`` and ``B1`` on the same space (with complements
``A2 = I - A1``, ``B2 = I - B1``) always share an orthonormal basis in which
all four are block-diagonal with blocks of size one or two. The construction
here sweeps the range of ``B1`` first: the joint eigenvectors ``v`` of
``B1 A1 B1`` restricted to that range either are eigenvectors of ``A1`` (one
dimensional blocks) or span, together with ``A1 v`` and ``A2 v``, a two
dimensional invariant block. Whatever is left lies in the range of ``B2`` and
commutes with ``A1``.

On top of this sit the POVM-to-projective mixture and the reduction of a
measured multipartite state to a mixture of measured qubit states.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import config
from .correlations import correlators_direct
from .errors import ClassificationError, InvalidInputError, NotProjectorError
from .qcore import (
    BinaryPovm,
    MeasurementAssembly,
    QuantumState,
    SloMap,
    as_matrix,
    is_projector,
    kron_all,
)
from .wwzb import WwzbInequality, wwzb_score

CLASSIFY_THRESHOLD = 1e-7
RESIDUAL_TOL = 1e-8
MIN_THRESHOLD = 1e-13


@dataclass(frozen=True)
class Block:
    offset: int
    size: int
    # eigenvalues of A1 and B1 on a one-dimensional block
    labels: tuple[int, int] | None = None


@dataclass(frozen=True)
class BlockDecomposition:
    dim: int
    basis: np.ndarray
    blocks: tuple[Block, ...]
    flagged: tuple[int, ...] = ()

    def columns(self, block: Block) -> np.ndarray:
        return self.basis[:, block.offset : block.offset + block.size]

    def projectors(self) -> list[np.ndarray]:
        return [self.columns(b) @ self.columns(b).conj().T for b in self.blocks]

    def block_mask(self) -> np.ndarray:
        mask = np.zeros((self.dim, self.dim), dtype=bool)
        for b in self.blocks:
            mask[b.offset : b.offset + b.size, b.offset : b.offset + b.size] = True
        return mask

    def off_block_residual(self, m: np.ndarray) -> float:
        rotated = self.basis.conj().T @ m @ self.basis
        return float(np.linalg.norm(rotated[~self.block_mask()]))


def _orthonormalize(u: np.ndarray) -> np.ndarray:
    # closest unitary (polar factor)
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def _range_basis(proj: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (proj + proj.conj().T))
    return vecs[:, vals > 0.5]


def _near(mu: float, theta: float) -> bool:
    return theta / 10 <= mu < 10 * theta or theta / 10 <= 1 - mu < 10 * theta


def jordan_blocks(a1, b1, tol: float | None = None, theta: float = CLASSIFY_THRESHOLD) -> BlockDecomposition:
    """Common block basis for the projector pairs ``(a1, I - a1)`` and ``(b1, I - b1)``.

    A joint eigenvector ``v`` counts as an eigenvector of ``A1`` when
    ``<v|A1|v>`` is within ``theta`` of 0 or 1. If the resulting basis fails
    the block check, classification is repeated with ``theta / 10`` (down to
    ``MIN_THRESHOLD``); vectors close to the final threshold are listed in
    ``flagged``.
    """
    tol = config.tol(tol)
    a1, b1 = as_matrix(a1), as_matrix(b1)
    if a1.shape != b1.shape or a1.shape[0] != a1.shape[1]:
        raise InvalidInputError("projectors must be square and of equal size")
    for m in (a1, b1):
        if not is_projector(m, tol):
            raise NotProjectorError("input is not a projector within tolerance")
    error = None
    while theta >= MIN_THRESHOLD:
        try:
            return _sweep(a1, b1, theta)
        except ClassificationError as exc:
            error = exc
            theta /= 10
    raise error


def _sweep(a1, b1, theta):
    d = a1.shape[0]
    eye = np.eye(d)
    a2, b2 = eye - a1, eye - b1

    columns: list[np.ndarray] = []
    blocks: list[Block] = []
    flagged: list[int] = []
    ws: list[np.ndarray] = []

    def add(vectors, labels=None):
        blocks.append(Block(len(columns), len(vectors), labels))
        columns.extend(vectors)

    rng_b1 = _range_basis(b1)
    if rng_b1.shape[1]:
        mu, u = np.linalg.eigh(rng_b1.conj().T @ a1 @ rng_b1)
        for m, v in zip(mu, (rng_b1 @ u).T):
            if _near(m, theta):
                flagged.append(len(blocks))
            if m < theta:
                add([v], (0, 1))
            elif m > 1 - theta:
                add([v], (1, 1))
            else:
                p1, p2 = a1 @ v, a2 @ v
                n1, n2 = np.linalg.norm(p1), np.linalg.norm(p2)
                add([p1 / n1, p2 / n2])
                ws.append(n2 * p1 / n1 - n1 * p2 / n2)

    rest = b2
    if ws:
        w = np.array(ws).T
        rest = b2 - w @ w.conj().T
    rng_rest = _range_basis(rest)
    if rng_rest.shape[1]:
        mu, u = np.linalg.eigh(rng_rest.conj().T @ a1 @ rng_rest)
        for m, v in zip(mu, (rng_rest @ u).T):
            if _near(m, theta):
                flagged.append(len(blocks))
            if m < theta:
                add([v], (0, 0))
            elif m > 1 - theta:
                add([v], (1, 0))
            else:
                raise ClassificationError(f"vector with <A1> = {m:.3g} left after the first sweep")

    if len(columns) != d:
        raise ClassificationError(f"sweeps produced {len(columns)} basis vectors for dimension {d}")
    basis = np.array(columns).T
    if np.linalg.norm(basis.conj().T @ basis - eye) > 1e-6:
        raise ClassificationError("sweeps produced a non-orthogonal basis")
    dec = BlockDecomposition(d, _orthonormalize(basis), tuple(blocks), tuple(flagged))
    for m in (a1, b1):
        if dec.off_block_residual(m) > RESIDUAL_TOL * max(1.0, np.linalg.norm(m, 2)):
            raise ClassificationError("block structure does not hold within tolerance")
    return dec


@dataclass(frozen=True)
class ProjectiveMixture:
    components: tuple[tuple[float, np.ndarray], ...]

    def reconstruct(self) -> np.ndarray:
        return sum(w * q for w, q in self.components)

    def povms(self) -> list[tuple[float, BinaryPovm]]:
        return [(w, BinaryPovm.from_projector(q)) for w, q in self.components]


def povm_to_projective(p: BinaryPovm, tol: float | None = None) -> ProjectiveMixture:
    """Write ``effect_1`` as a convex combination of nested spectral projectors."""
    tol = config.tol(tol)
    vals, vecs = np.linalg.eigh(p.effect_1)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    if vals[0] > 1 + tol or vals[-1] < -tol:
        raise InvalidInputError("effect eigenvalue outside [0, 1]")
    vals = np.clip(vals, 0.0, 1.0)
    d = len(vals)
    gaps = vals - np.append(vals[1:], 0.0)
    components = [(1.0 - vals[0], np.zeros((d, d), dtype=complex))]
    for k in range(d):
        top = vecs[:, : k + 1]
        components.append((float(gaps[k]), top @ top.conj().T))
    kept = tuple((float(w), q) for w, q in components if w > tol)
    return ProjectiveMixture(kept)


@dataclass(frozen=True)
class QubitBlock:
    """Isometry into a party's space (``d x 2``; a zero column marks a padding slot)."""

    isometry: np.ndarray
    povms: tuple[BinaryPovm, BinaryPovm]
    padded: bool


@dataclass(frozen=True)
class QubitComponent:
    weight: float
    state: QuantumState
    assembly: MeasurementAssembly
    blocks: tuple[int, ...]


@dataclass(frozen=True)
class QubitReduction:
    components: tuple[QubitComponent, ...]
    party_blocks: tuple[tuple[QubitBlock, ...], ...]

    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    def component_filter(self, index: int) -> SloMap:
        """Local filter mapping the original state to component ``index`` (before renormalization)."""
        comp = self.components[index]
        return SloMap.product_filter(
            [self.party_blocks[n][i].isometry.conj().T for n, i in enumerate(comp.blocks)]
        )


def _qubit_blocks(a1, b1, tol) -> tuple[QubitBlock, ...]:
    dec = jordan_blocks(a1, b1, tol)
    d = dec.dim
    pairs, singles = [], []
    for b in dec.blocks:
        (pairs if b.size == 2 else singles).append(dec.columns(b))
    for k in range(0, len(singles) - 1, 2):
        pairs.append(np.hstack([singles[k], singles[k + 1]]))
    out = []
    for cols in pairs:
        out.append((cols, False))
    if len(singles) % 2:
        out.append((np.hstack([singles[-1], np.zeros((d, 1))]), True))
    blocks = []
    for iso, padded in out:
        effects = []
        for p in (a1, b1):
            q = iso.conj().T @ p @ iso
            if padded:
                # the pad slot never carries weight; it answers outcome 1 deterministically
                q[1, :] = 0
                q[:, 1] = 0
                q[1, 1] = 1
            effects.append(BinaryPovm.from_projector(0.5 * (q + q.conj().T), tol))
        blocks.append(QubitBlock(iso, tuple(effects), padded))
    return tuple(blocks)


def qubit_reduce(state: QuantumState, assembly: MeasurementAssembly, tol: float | None = None) -> QubitReduction:
    """Decompose the measured state into a mixture of measured N-qubit states."""
    tol = config.tol(tol)
    assembly.check_state(state)
    if not assembly.is_projective(max(tol, 1e-9)):
        raise InvalidInputError("qubit reduction needs projective measurements")
    party_blocks = tuple(
        _qubit_blocks(pair[0].effect_1, pair[1].effect_1, tol) for pair in assembly.povms
    )
    raw = []
    for idx in itertools.product(*(range(len(b)) for b in party_blocks)):
        k = kron_all([party_blocks[n][i].isometry.conj().T for n, i in enumerate(idx)])
        sub = k @ state.rho @ k.conj().T
        weight = float(np.trace(sub).real)
        if weight < tol:
            continue
        raw.append((weight, sub, idx))
    total = sum(w for w, _, _ in raw)
    components = []
    for weight, sub, idx in raw:
        st = QuantumState((2,) * state.parties, sub / weight, state.tol)
        asm = MeasurementAssembly(tuple(party_blocks[n][i].povms for n, i in enumerate(idx)))
        components.append(QubitComponent(weight / total, st, asm, idx))
    return QubitReduction(tuple(components), party_blocks)


def component_scores(r: QubitReduction, ineq: WwzbInequality) -> np.ndarray:
    return np.array([wwzb_score(ineq, correlators_direct(c.state, c.assembly)) for c in r.components])


def best_block(r: QubitReduction, ineq: WwzbInequality) -> tuple[int, float]:
    """Component with the largest score; ties go to the lowest index."""
    if not r.components:
        raise InvalidInputError("empty reduction")
    scores = component_scores(r, ineq)
    i = int(np.argmax(scores))
    return i, float(scores[i])
