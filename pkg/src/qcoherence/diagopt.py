"""Trace-distance minimization over diagonal matrices.

Solves ``min_D || rho - diag(D) ||_tr`` with ``D`` either on the probability
simplex (distance to the incoherent states) or in the nonnegative orthant
(distance to the cone of unnormalized incoherent matrices).

The solver runs projected subgradient descent from several feasible
starting points, then refines the best point on a smoothed objective
``sum_k sqrt(lambda_k^2 + mu^2)`` while driving ``mu`` towards zero.
The subgradient stage alone stalls at errors around 1e-4 on states whose
optimum has a degenerate (zero) eigenvalue; the smoothed stage removes that.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import matcore
from .errors import DimensionTooLarge
from .states import DensityState

DEFAULT_TOL = 1e-6
STEP0 = 0.5
STALL_WINDOW = 200
MAX_ITER = 50_000
RESTARTS = 5
SIGN_ZERO = 1e-12
SMOOTHING = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9)
ORTHANT_MASS = 2.0  # optimum never has sum(D) > 2, since ||rho - D|| >= |1 - sum(D)|


class DiagConstraint(enum.Enum):
    SIMPLEX = "simplex"
    NONNEG = "nonneg"


@dataclass(frozen=True)
class OptResult:
    value: float
    argmin: tuple[float, ...]
    iterations: int
    converged: bool


def project_simplex(x: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum x = 1}`` by sorting and thresholding.

    Works row-wise on a 2-D array.
    """
    x = np.asarray(x, dtype=float)
    flat = x.ndim == 1
    x = np.atleast_2d(x)
    u = -np.sort(-x, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    k = np.arange(1, x.shape[1] + 1)
    r = np.sum(u - css / k > 0, axis=1)  # the condition holds on a prefix
    theta = css[np.arange(x.shape[0]), r - 1] / r
    out = np.maximum(x - theta[:, None], 0.0)
    return out[0] if flat else out


def project(x: np.ndarray, constraint: DiagConstraint) -> np.ndarray:
    if constraint is DiagConstraint.SIMPLEX:
        return project_simplex(x)
    return np.maximum(x, 0.0)


def objective(rho: np.ndarray, D: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh(rho - np.diag(D)))))


def _subgradient(rho, starts, constraint, tol, max_iter):
    """Projected subgradient descent from every row of ``starts`` in lockstep.

    Each run keeps its own best point and stall counter and drops out of the
    batch once its best value has not improved by ``tol/10`` for
    ``STALL_WINDOW`` consecutive iterations.
    """
    D = np.array(starts, dtype=float)
    k_runs, d = D.shape
    idx = np.arange(d)
    best = np.full(k_runs, math.inf)
    best_D = D.copy()
    last_gain = np.zeros(k_runs, dtype=int)
    iters = np.full(k_runs, max_iter)
    stalled = np.zeros(k_runs, dtype=bool)
    active = np.arange(k_runs)
    for k in range(max_iter):
        a = np.broadcast_to(rho, (active.size, d, d)).copy()
        a[:, idx, idx] -= D[active]
        w, u = np.linalg.eigh(a)
        val = np.abs(w).sum(axis=1)
        gain = val < best[active] - tol / 10
        last_gain[active[gain]] = k
        better = val < best[active]
        best[active[better]] = val[better]
        best_D[active[better]] = D[active[better]]
        done = k - last_gain[active] >= STALL_WINDOW
        if done.any():
            stalled[active[done]] = True
            iters[active[done]] = k + 1
            keep = ~done
            active, w, u = active[keep], w[keep], u[keep]
            if active.size == 0:
                break
        sgn = np.where(np.abs(w) < SIGN_ZERO, 0.0, np.sign(w))
        g = -np.einsum("rik,rk->ri", np.abs(u) ** 2, sgn)
        D[active] = project(D[active] - STEP0 / math.sqrt(k + 1) * g, constraint)
    return best, best_D, iters, stalled


def _smoothed(D, rho, mu):
    w, u = np.linalg.eigh(rho - np.diag(D))
    s = np.sqrt(w * w + mu * mu)
    g = -(np.abs(u) ** 2) @ (w / s)
    return float(s.sum()), g


def _refine(rho, D, constraint):
    d = D.size
    cons = []
    if constraint is DiagConstraint.SIMPLEX:
        cons = [{"type": "eq", "fun": lambda x: x.sum() - 1.0, "jac": lambda x: np.ones(d)}]
    best_val, best_D, nit = objective(rho, D), D, 0
    for mu in SMOOTHING:
        res = minimize(
            _smoothed, D, args=(rho, mu), jac=True, method="SLSQP",
            bounds=[(0.0, None)] * d, constraints=cons,
            options={"ftol": 1e-15, "maxiter": 500},
        )
        nit += int(res.nit)
        D = project(np.asarray(res.x, dtype=float), constraint)
        val = objective(rho, D)
        if val < best_val:
            best_val, best_D = val, D
    return best_val, best_D, nit


def random_starts(d: int, constraint: DiagConstraint, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` random feasible points: uniform on the simplex, or uniform in ``[0, 2/d]^d``."""
    if constraint is DiagConstraint.SIMPLEX:
        return rng.dirichlet(np.ones(d), size=n)
    return rng.random((n, d)) * ORTHANT_MASS / d


def minimize_trace_distance(
    rho: DensityState,
    constraint: DiagConstraint | str = DiagConstraint.SIMPLEX,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    *,
    restarts: int = RESTARTS,
    starts=None,
    max_iter: int = MAX_ITER,
    refine: bool = True,
) -> OptResult:
    """Minimize ``||rho - diag(D)||_tr`` over the feasible set of ``constraint``.

    By default the subgradient stage starts from the dephased diagonal plus
    ``restarts - 1`` random feasible points drawn from ``seed``; explicit
    ``starts`` (rows of feasible points) override that. The best run is
    refined on the smoothed objective. The reported value is re-evaluated
    at the returned argmin with a fresh eigendecomposition, so it is always
    attained by a feasible point. ``converged`` is false when the best run
    used its whole iteration budget without stalling.
    """
    constraint = DiagConstraint(constraint)
    m = rho.mat
    if starts is None:
        starts = np.vstack([np.diag(m).real[None, :],
                            random_starts(rho.dim, constraint, restarts - 1, np.random.default_rng(seed))])
    starts = project(np.atleast_2d(np.asarray(starts, dtype=float)), constraint)
    vals, Ds, iters, stalled = _subgradient(m, starts, constraint, tol, max_iter)
    i = int(np.argmin(vals))
    D, total = Ds[i], int(iters.sum())
    if refine:
        rval, rD, rits = _refine(m, D, constraint)
        total += rits
        if rval < vals[i]:
            D = rD
    value = matcore.trace_norm(m - np.diag(D))
    return OptResult(value, tuple(float(x) for x in D), total, bool(stalled[i]))


def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``."""
    rows = np.zeros((1, 0), dtype=np.int64)
    rem = np.array([total])
    for _ in range(parts - 1):
        counts = rem + 1
        offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        rows = np.column_stack([np.repeat(rows, counts, axis=0), offs])
        rem = np.repeat(rem, counts) - offs
    return np.column_stack([rows, rem])


def grid_oracle(
    rho: DensityState,
    constraint: DiagConstraint | str = DiagConstraint.SIMPLEX,
    resolution: int = 200,
    *,
    max_dim: int = 4,
    max_points: int = 20_000_000,
    chunk: int = 200_000,
) -> float:
    """Brute-force minimum over a uniform grid of feasible diagonals.

    Simplex grids have spacing ``1/resolution``; orthant grids cover
    ``{D >= 0, sum(D) <= 2}`` with spacing ``2/resolution``. The result is an
    upper bound on the true minimum.
    """
    constraint = DiagConstraint(constraint)
    m = rho.mat
    d = m.shape[0]
    if d > max_dim:
        raise DimensionTooLarge(f"grid oracle limited to dim <= {max_dim}, got {d}")
    parts = d if constraint is DiagConstraint.SIMPLEX else d + 1
    npts = math.comb(resolution + parts - 1, parts - 1)
    if npts > max_points:
        raise DimensionTooLarge(f"{npts} grid points exceeds {max_points}")
    scale = 1.0 if constraint is DiagConstraint.SIMPLEX else ORTHANT_MASS
    grid = _compositions(resolution, parts)[:, :d] * (scale / resolution)
    best = math.inf
    idx = np.arange(d)
    for lo in range(0, len(grid), chunk):
        g = grid[lo:lo + chunk]
        batch = np.broadcast_to(m, (len(g), d, d)).copy()
        batch[:, idx, idx] -= g
        vals = np.abs(np.linalg.eigvalsh(batch)).sum(axis=1)
        best = min(best, float(vals.min()))
    return best
