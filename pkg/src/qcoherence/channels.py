"""Kraus-operator channels and the named constructions used by the framework checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import matcore
from .errors import DimensionMismatch, InvalidSpec, NotHermitian
from .states import DensityState, _complex_gaussian, random_density

COMPLETENESS_TOL = 1e-10
INCOHERENT_ENTRY_TOL = 1e-12
OUTPUT_TOL = 1e-9
NULL_OUTCOME = 1e-12
DEFAULT_TIMES = (0.37, 1.0, 2.5, math.pi)


class KrausChannel:
    """CPTP map ``rho -> sum_n K_n rho K_n^dagger`` with ``out_dim x in_dim`` Kraus operators."""

    __slots__ = ("kraus", "in_dim", "out_dim")

    def __init__(self, kraus: Sequence, tol: float = COMPLETENESS_TOL):
        ops = [matcore.as_cmat(k) for k in kraus]
        if not ops:
            raise InvalidSpec("channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise InvalidSpec("Kraus operators must share one shape")
        out_dim, in_dim = shape
        gram = sum(k.conj().T @ k for k in ops)
        err = float(np.max(np.abs(gram - np.eye(in_dim))))
        if err > tol:
            raise InvalidSpec(f"completeness violated: max |sum K^dagger K - I| = {err:.3e} > {tol:.1e}")
        for k in ops:
            k.setflags(write=False)
        self.kraus = tuple(ops)
        self.in_dim = in_dim
        self.out_dim = out_dim

    def __len__(self):
        return len(self.kraus)

    def __repr__(self):
        return f"KrausChannel(in_dim={self.in_dim}, out_dim={self.out_dim}, n_kraus={len(self)})"


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian matrix fixing the basis of the observable-relative framework."""

    mat: np.ndarray

    def __post_init__(self):
        a = matcore.as_cmat(self.mat)
        if a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"observable is {a.shape[0]}x{a.shape[1]}")
        asym = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
        if asym > 1e-10:
            raise NotHermitian(f"observable asymmetry {asym:.3e}")
        a = 0.5 * (a + a.conj().T)
        a.setflags(write=False)
        object.__setattr__(self, "mat", a)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def evolution(self, t: float) -> np.ndarray:
        """``exp(-i H t)``."""
        return matcore.spectral_apply(self.mat, lambda w: np.exp(-1j * w * t))

    def direct_sum(self, other: "Observable") -> "Observable":
        return Observable(matcore.direct_sum(self.mat, other.mat))


class SelectiveOutcome(NamedTuple):
    index: int
    probability: float
    state: DensityState | None  # None for null outcomes

    @property
    def null(self) -> bool:
        return self.state is None


def _check_input(ch: KrausChannel, rho: DensityState):
    if rho.dim != ch.in_dim:
        raise DimensionMismatch(f"state has dim {rho.dim}, channel expects {ch.in_dim}")


def apply_matrix(ch: KrausChannel, m) -> np.ndarray:
    """Raw ``sum_n K_n m K_n^dagger`` for any square ``m`` (no validation of the output)."""
    m = np.asarray(m, dtype=complex)
    return sum(k @ m @ k.conj().T for k in ch.kraus)


def apply(ch: KrausChannel, rho: DensityState, tol: float = OUTPUT_TOL) -> DensityState:
    _check_input(ch, rho)
    return DensityState(apply_matrix(ch, rho.mat), tol)


def selective_outcomes(ch: KrausChannel, rho: DensityState, tol: float = OUTPUT_TOL) -> list[SelectiveOutcome]:
    """Born probabilities and post-measurement states, one per Kraus operator.

    Outcomes with probability below ``NULL_OUTCOME`` carry ``state=None``.
    """
    _check_input(ch, rho)
    out = []
    for n, k in enumerate(ch.kraus):
        m = k @ rho.mat @ k.conj().T
        p = float(np.trace(m).real)
        if p < NULL_OUTCOME:
            out.append(SelectiveOutcome(n, max(p, 0.0), None))
        else:
            out.append(SelectiveOutcome(n, p, DensityState(m / p, tol)))
    return out


def is_incoherent_channel(ch: KrausChannel, tol: float = INCOHERENT_ENTRY_TOL) -> bool:
    """At most one entry of modulus above ``tol`` in every column of every Kraus operator.

    This is equivalent to each ``K delta K^dagger`` being diagonal for all
    diagonal ``delta``.
    """
    return all(bool(np.all(np.sum(np.abs(k) > tol, axis=0) <= 1)) for k in ch.kraus)


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel([np.eye(d)])


def unitary_channel(u) -> KrausChannel:
    return KrausChannel([u])


def dephasing_channel(d: int) -> KrausChannel:
    """Complete dephasing in the incoherent basis, Kraus operators ``|i><i|``."""
    ops = []
    for i in range(d):
        k = np.zeros((d, d))
        k[i, i] = 1.0
        ops.append(k)
    return KrausChannel(ops)


def hadamard() -> np.ndarray:
    return np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


def projector_channel(n1: int, n2: int) -> KrausChannel:
    """Projectors onto the first ``n1`` and the last ``n2`` basis states."""
    if n1 < 1 or n2 < 1:
        raise InvalidSpec("subspace dimensions must be >= 1")
    d = n1 + n2
    p1 = np.diag([1.0] * n1 + [0.0] * n2)
    p2 = np.eye(d) - p1
    return KrausChannel([p1, p2])


def embed_channel(n1: int, n2: int) -> KrausChannel:
    """Isometric padding ``rho_1 -> rho_1 (+) 0`` from ``n1`` into ``n1 + n2`` dimensions."""
    if n1 < 1 or n2 < 1:
        raise InvalidSpec("subspace dimensions must be >= 1")
    k = np.zeros((n1 + n2, n1))
    k[:n1, :n1] = np.eye(n1)
    return KrausChannel([k])


def truncate_channel(n1: int, n2: int) -> KrausChannel:
    """Fold ``n1 + n2`` dimensions back onto ``n1``: ``<j|K_n|i> = 1`` iff ``i = j + n*n1``.

    Uses ``ceil(n2/n1) + 1`` Kraus operators so that every input index is
    covered exactly once; it inverts :func:`embed_channel`.
    """
    if n1 < 1 or n2 < 1:
        raise InvalidSpec("subspace dimensions must be >= 1")
    d = n1 + n2
    ops = []
    for n in range(-(-n2 // n1) + 1):
        k = np.zeros((n1, d))
        for j in range(n1):
            i = j + n * n1
            if i < d:
                k[j, i] = 1.0
        ops.append(k)
    return KrausChannel(ops)


def shift_unitary(N: int, n: int) -> np.ndarray:
    """Cyclic shift ``|k> -> |k + n mod N>``."""
    if not 0 <= n < N:
        raise InvalidSpec(f"shift {n} out of range for N={N}")
    u = np.zeros((N, N))
    for k in range(N):
        u[(k + n) % N, k] = 1.0
    return u


def flag_channel_b3(ch: KrausChannel) -> KrausChannel:
    """Channel on ``aux (x) system`` with Kraus operators ``U_n (x) K_n``.

    Acting on ``|0><0| (x) rho`` it writes outcome ``n`` of ``ch`` into the
    auxiliary register: the output is ``sum_n p_n |n><n| (x) rho_n``.
    """
    if ch.in_dim != ch.out_dim:
        raise DimensionMismatch("flag construction needs a square channel")
    N = len(ch)
    return KrausChannel([np.kron(shift_unitary(N, n), k) for n, k in enumerate(ch.kraus)])


def merge_flag_channel(N: int, d: int) -> KrausChannel:
    """Kraus operators ``|0><n| (x) I_d``: erase the flag, keep the average state."""
    if N < 1 or d < 1:
        raise InvalidSpec("N and d must be >= 1")
    ops = []
    for n in range(N):
        e = np.zeros((N, N))
        e[0, n] = 1.0
        ops.append(np.kron(e, np.eye(d)))
    return KrausChannel(ops)


def flag_state(weights: Sequence[float], states: Sequence[DensityState]) -> DensityState:
    """``sum_n p_n |n><n| (x) rho_n`` for equal-dimension states."""
    d = states[0].dim
    if any(s.dim != d for s in states):
        raise DimensionMismatch("flagged states must share one dimension")
    N = len(states)
    m = np.zeros((N * d, N * d), dtype=complex)
    for n, (p, s) in enumerate(zip(weights, states)):
        proj = np.zeros((N, N))
        proj[n, n] = 1.0
        m += p * np.kron(proj, s.mat)
    return DensityState(m, OUTPUT_TOL)


def random_incoherent_channel(d: int, n_kraus: int, seed=None, *, rng: np.random.Generator | None = None) -> KrausChannel:
    """Random incoherent channel on ``d`` dimensions.

    For each Kraus index ``n`` and column ``j`` a target row ``f_n(j)`` is
    drawn uniformly together with a complex Gaussian amplitude ``c_nj``.
    Within one Kraus operator two columns may not share a row (a random
    one keeps it, the others are zeroed); this makes the columns of the
    stacked Kraus operators disjointly supported, so normalizing each
    column to ``sum_n |c_nj|^2 = 1`` gives exact completeness.
    """
    if d < 1 or n_kraus < 1:
        raise InvalidSpec("d and n_kraus must be >= 1")
    rng = np.random.default_rng(seed) if rng is None else rng
    rows = rng.integers(0, d, size=(n_kraus, d))
    amps = _complex_gaussian(rng, (n_kraus, d))
    for n in range(n_kraus):
        for r in np.unique(rows[n]):
            cols = np.flatnonzero(rows[n] == r)
            if cols.size > 1:
                amps[n, np.setdiff1d(cols, rng.choice(cols))] = 0.0
    for j in np.flatnonzero(np.all(amps == 0.0, axis=0)):
        # a column that lost every slot takes a free (op, row) slot; one always exists
        # because the other d-1 columns occupy at most n_kraus*(d-1) of them
        free = [(n, r) for n in range(n_kraus) for r in range(d)
                if not np.any((rows[n] == r) & (amps[n] != 0.0))]
        n, r = free[rng.integers(len(free))]
        rows[n, j] = r
        amps[n, j] = _complex_gaussian(rng, ())
    amps /= np.linalg.norm(amps, axis=0, keepdims=True)
    ops = np.zeros((n_kraus, d, d), dtype=complex)
    for n in range(n_kraus):
        ops[n, rows[n], np.arange(d)] = amps[n]
    return KrausChannel(list(ops))


def random_incoherent_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Permutation matrix with random phases."""
    perm = rng.permutation(d)
    u = np.zeros((d, d), dtype=complex)
    u[perm, np.arange(d)] = np.exp(2j * np.pi * rng.random(d))
    return u


def translation_violation(
    ch: KrausChannel,
    H: Observable,
    t_samples: Sequence[float] = DEFAULT_TIMES,
    rho_samples: int = 8,
    seed=0,
):
    """Largest entrywise gap between ``e^{-iHt} L(rho) e^{iHt}`` and ``L(e^{-iHt} rho e^{iHt})``.

    Returns ``(gap, t, rho)`` for the worst sampled pair.
    """
    if ch.in_dim != ch.out_dim or H.dim != ch.in_dim:
        raise DimensionMismatch(f"channel {ch.in_dim}->{ch.out_dim} vs observable dim {H.dim}")
    rng = np.random.default_rng(seed)
    rhos = [random_density(ch.in_dim, rng=rng) for _ in range(rho_samples)]
    worst = (-1.0, None, None)
    for t in t_samples:
        u = H.evolution(t)
        for rho in rhos:
            lhs = u @ apply_matrix(ch, rho.mat) @ u.conj().T
            rhs = apply_matrix(ch, u @ rho.mat @ u.conj().T)
            gap = float(np.max(np.abs(lhs - rhs)))
            if gap > worst[0]:
                worst = (gap, float(t), rho)
    return worst


def is_translation_invariant(
    ch: KrausChannel,
    H: Observable,
    t_samples: Sequence[float] = DEFAULT_TIMES,
    rho_samples: int = 8,
    seed=0,
    tol: float = 1e-9,
) -> bool:
    """Sampled check of covariance under ``rho -> e^{-iHt} rho e^{iHt}``.

    A ``False`` is a proof (see :func:`translation_violation` for the
    witness); ``True`` only means no sampled pair violated the identity.
    """
    return translation_violation(ch, H, t_samples, rho_samples, seed)[0] <= tol


def random_nondegenerate_observable(d: int, rng: np.random.Generator, min_gap: float = 0.1) -> Observable:
    """Hermitian matrix in a Haar-random basis with eigenvalues at least ``min_gap`` apart."""
    gaps = min_gap + rng.random(d)
    eig = np.cumsum(gaps) - gaps.sum() / 2
    v = haar_unitary(d, rng)
    return Observable((v * eig) @ v.conj().T)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(_complex_gaussian(rng, (d, d)))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_ti_channel(H: Observable, rng: np.random.Generator, n_unitaries: int = 2) -> KrausChannel:
    """Mixture of unitaries diagonal in the eigenbasis of ``H`` and dephasing in that eigenbasis.

    Each component commutes with the ``H``-generated evolution, so the
    mixture is translationally invariant (``H`` assumed nondegenerate).
    """
    d = H.dim
    _, v = matcore.herm_eig(H.mat)
    q = rng.dirichlet(np.ones(n_unitaries + 1))
    ops = []
    for k in range(n_unitaries):
        u = (v * np.exp(2j * np.pi * rng.random(d))) @ v.conj().T
        ops.append(np.sqrt(q[k]) * u)
    for i in range(d):
        ops.append(np.sqrt(q[-1]) * np.outer(v[:, i], v[:, i].conj()))
    return KrausChannel(ops)
