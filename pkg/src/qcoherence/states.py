"""Density states in the fixed incoherent basis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import matcore
from .errors import InvalidSpec, NonSquare, NotHermitian, NotPSD, NotUnitTrace

STATE_TOL = 1e-10
INCOHERENCE_TOL = 1e-9
WEIGHT_TOL = 1e-12


class DensityState:
    """Hermitian, positive semidefinite, unit-trace matrix.

    Construction validates all three invariants at ``tol``; the stored
    matrix is the symmetrized input and is read-only.
    """

    __slots__ = ("_mat",)

    def __init__(self, mat, tol: float = STATE_TOL):
        a = matcore.as_cmat(mat)
        if a.shape[0] != a.shape[1]:
            raise NonSquare(f"density matrix is {a.shape[0]}x{a.shape[1]}")
        if a.shape[0] == 0:
            raise InvalidSpec("density matrix must have dimension >= 1")
        asym = float(np.max(np.abs(a - a.conj().T)))
        if asym > tol:
            raise NotHermitian(f"Hermitian invariant violated: asymmetry {asym:.3e} > {tol:.1e}")
        a = 0.5 * (a + a.conj().T)
        tr = float(np.trace(a).real)
        if abs(tr - 1.0) > tol:
            raise NotUnitTrace(f"unit-trace invariant violated: trace {tr:.12g} (|tr-1| = {abs(tr - 1):.3e} > {tol:.1e})")
        wmin = float(np.linalg.eigvalsh(a)[0])
        if wmin < -tol:
            raise NotPSD(f"positivity invariant violated: minimum eigenvalue {wmin:.3e} < -{tol:.1e}")
        a.setflags(write=False)
        self._mat = a

    @property
    def mat(self) -> np.ndarray:
        return self._mat

    @property
    def dim(self) -> int:
        return self._mat.shape[0]

    def __repr__(self):
        return f"DensityState(dim={self.dim})"

    def __eq__(self, other):
        return isinstance(other, DensityState) and np.array_equal(self._mat, other._mat)

    __hash__ = None


def make_density(mat, tol: float = STATE_TOL) -> DensityState:
    return DensityState(mat, tol)


@dataclass(frozen=True)
class BlockSpec:
    """Weighted blocks ``p_1 rho_1 (+) ... (+) p_N rho_N`` on orthogonal subspaces."""

    weights: tuple[float, ...]
    blocks: tuple[DensityState, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.blocks) or not self.blocks:
            raise InvalidSpec("need one weight per block and at least one block")
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise InvalidSpec(f"weights must be nonnegative and sum to 1 (sum = {w.sum():.15g})")
        object.__setattr__(self, "weights", tuple(float(x) for x in self.weights))
        object.__setattr__(self, "blocks", tuple(self.blocks))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.dim for b in self.blocks)


def block_mix(spec: BlockSpec) -> DensityState:
    return DensityState(matcore.block_diag(*(p * b.mat for p, b in zip(spec.weights, spec.blocks))))


def incoherent_state(probs: Sequence[float]) -> DensityState:
    return DensityState(np.diag(np.asarray(probs, dtype=complex)))


def basis_state(d: int, i: int) -> DensityState:
    """Projector ``|i><i|`` on a ``d``-dimensional space."""
    m = np.zeros((d, d), dtype=complex)
    m[i, i] = 1.0
    return DensityState(m)


def pure_state(vec) -> DensityState:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityState(np.outer(v, v.conj()))


def max_coherent(d: int) -> DensityState:
    if d < 1:
        raise InvalidSpec("dimension must be at least 1")
    return DensityState(np.full((d, d), 1.0 / d, dtype=complex))


def maximally_mixed(d: int) -> DensityState:
    return DensityState(np.eye(d, dtype=complex) / d)


def dephase(rho: DensityState) -> DensityState:
    return DensityState(np.diag(np.diag(rho.mat)))


def is_incoherent(rho: DensityState, tol: float = INCOHERENCE_TOL) -> bool:
    off = rho.mat - np.diag(np.diag(rho.mat))
    return bool(np.all(np.abs(off) <= tol))


def offdiag_mass(rho: DensityState) -> float:
    """Sum of off-diagonal moduli; used to gate "clearly coherent" samples."""
    m = rho.mat
    return float(np.sum(np.abs(m)) - np.sum(np.abs(np.diag(m))))


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_density(d: int, rank: int | None = None, seed=None, *, rng: np.random.Generator | None = None) -> DensityState:
    """Ginibre-ensemble state ``G G^dagger / Tr(G G^dagger)`` with ``G`` of shape ``d x rank``.

    Deterministic for a given ``seed``; pass ``rng`` instead to draw from an
    existing generator.
    """
    rank = d if rank is None else rank
    if d < 1 or not 1 <= rank <= d:
        raise InvalidSpec(f"need 1 <= rank <= d, got d={d}, rank={rank}")
    rng = np.random.default_rng(seed) if rng is None else rng
    g = _complex_gaussian(rng, (d, rank))
    m = g @ g.conj().T
    return DensityState(m / np.trace(m).real)


def random_pure(d: int, seed=None, *, rng: np.random.Generator | None = None) -> DensityState:
    rng = np.random.default_rng(seed) if rng is None else rng
    return pure_state(_complex_gaussian(rng, d))


def random_probabilities(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the probability simplex, renormalized to sum exactly to 1."""
    p = rng.dirichlet(np.ones(n))
    return p / p.sum()


def counterexample_state() -> tuple[DensityState, DensityState, DensityState]:
    """Half-half mixture of the maximally coherent qubit and qutrit on disjoint supports.

    Returns ``(rho, rho1, rho2)`` with ``rho = rho1/2 (+) rho2/2``.
    """
    rho1 = max_coherent(2)
    rho2 = max_coherent(3)
    return block_mix(BlockSpec((0.5, 0.5), (rho1, rho2))), rho1, rho2


def counterexample_spec() -> BlockSpec:
    _, rho1, rho2 = counterexample_state()
    return BlockSpec((0.5, 0.5), (rho1, rho2))
