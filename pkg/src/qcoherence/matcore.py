"""Dense complex-matrix kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The Hermitian
eigensolver comes in two flavours: a cyclic complex Jacobi method written
here, and the LAPACK driver behind :func:`numpy.linalg.eigh`. Both honour
the same contract; LAPACK is the default because the verification suites
decompose millions of small matrices.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NonSquare, NotHermitian, NotPSD

HERMITIAN_TOL = 1e-8
PSD_ERROR_TOL = 1e-8
JACOBI_REL_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


class EigDecomp(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_cmat(m) -> np.ndarray:
    """Coerce ``m`` to a 2-D complex array and reject non-finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise NonSquare(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def hermitize(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(m + m^dagger)/2`` after checking ``m`` is square and nearly Hermitian."""
    a = as_cmat(m)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"matrix is {a.shape[0]}x{a.shape[1]}")
    if a.size:
        asym = float(np.max(np.abs(a - a.conj().T)))
        if asym > tol:
            raise NotHermitian(f"asymmetry {asym:.3e} exceeds {tol:.1e}")
    return 0.5 * (a + a.conj().T)


def _jacobi(a: np.ndarray, rel_tol: float, max_sweeps: int) -> tuple[np.ndarray, np.ndarray]:
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < rel_tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # g = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ g
                a[p, q] = a[q, p] = 0.0
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def herm_eig(
    m,
    *,
    method: str = "lapack",
    herm_tol: float = HERMITIAN_TOL,
    rel_tol: float = JACOBI_REL_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> EigDecomp:
    """Full spectral decomposition of a Hermitian matrix.

    Parameters
    ----------
    m : array_like
        Square matrix, Hermitian up to ``herm_tol``; it is symmetrized first.
    method : {"lapack", "jacobi"}
        ``"jacobi"`` runs cyclic complex Givens sweeps until the off-diagonal
        Frobenius mass drops below ``rel_tol * ||m||_F``.

    Returns
    -------
    EigDecomp
        Eigenvalues in ascending order and the unitary whose columns are
        the matching eigenvectors.
    """
    a = hermitize(m, herm_tol)
    if method == "lapack":
        w, v = np.linalg.eigh(a)
    elif method == "jacobi":
        w, v = _jacobi(a, rel_tol, max_sweeps)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return EigDecomp(w, v)


def trace_norm(m, **kw) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    w = herm_eig(m, **kw).eigenvalues
    return float(np.sum(np.abs(w)))


def direct_sum(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=complex)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


def block_diag(*blocks) -> np.ndarray:
    out = np.zeros((0, 0), dtype=complex)
    for blk in blocks:
        out = direct_sum(out, blk)
    return out


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def spectral_apply(m, fn, **kw) -> np.ndarray:
    """Apply a scalar function to the spectrum of a Hermitian matrix."""
    w, v = herm_eig(m, **kw)
    return (v * fn(w)) @ v.conj().T


def mat_sqrt_psd(m, *, error_tol: float = PSD_ERROR_TOL, **kw) -> np.ndarray:
    """Hermitian PSD square root.

    Eigenvalues in ``[-error_tol, 0)`` are treated as round-off and clipped;
    anything more negative raises :class:`NotPSD`. Eigenvalues below the
    eigensolver noise floor ``d * eps * max|w|`` are also set to zero, since
    their square roots (around 1e-8) would otherwise be pure noise.
    """
    w, v = herm_eig(m, **kw)
    if w.size and w[0] < -error_tol:
        raise NotPSD(f"minimum eigenvalue {w[0]:.3e} below -{error_tol:.1e}")
    floor = w.size * np.finfo(float).eps * (np.abs(w).max() if w.size else 0.0)
    root = np.sqrt(np.where(w > floor, w, 0.0))
    out = (v * root) @ v.conj().T
    return 0.5 * (out + out.conj().T)
