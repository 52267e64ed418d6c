"""Coherence measures and their registry."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import diagopt, matcore
from .channels import Observable
from .diagopt import DiagConstraint
from .errors import CoherenceError, DimensionMismatch, NotConverged
from .states import DensityState, dephase

CLIP_TOL = 1e-9


def _clip(value: float, what: str) -> float:
    if value < -CLIP_TOL:
        raise CoherenceError(f"{what} came out negative beyond round-off: {value:.3e}")
    return max(value, 0.0)


def shannon_entropy(p) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho: DensityState) -> float:
    w = np.clip(np.linalg.eigvalsh(rho.mat), 0.0, None)
    return shannon_entropy(w)


def relative_entropy_coherence(rho: DensityState) -> float:
    """``S(dephase(rho)) - S(rho)``."""
    return _clip(von_neumann_entropy(dephase(rho)) - von_neumann_entropy(rho), "relative entropy of coherence")


def l1_coherence(rho: DensityState) -> float:
    m = np.abs(rho.mat)
    return float(m.sum() - np.trace(m))


def _optimized(rho, constraint, tol, seed, restarts):
    res = diagopt.minimize_trace_distance(rho, constraint, tol, seed, restarts=restarts)
    if not res.converged:
        raise NotConverged(f"trace-distance minimization did not stall within budget (best {res.value:.8g})", res)
    return res.value


def trace_norm_coherence(rho: DensityState, tol: float = diagopt.DEFAULT_TOL, seed: int = 0,
                         restarts: int = diagopt.RESTARTS) -> float:
    """Trace distance from ``rho`` to the closest incoherent state."""
    return _optimized(rho, DiagConstraint.SIMPLEX, tol, seed, restarts)


def modified_trace_norm_coherence(rho: DensityState, tol: float = diagopt.DEFAULT_TOL, seed: int = 0,
                                  restarts: int = diagopt.RESTARTS) -> float:
    """Trace distance from ``rho`` to the cone ``{lambda * delta : lambda >= 0}`` of scaled incoherent states."""
    return _optimized(rho, DiagConstraint.NONNEG, tol, seed, restarts)


def skew_information(rho: DensityState, H: Observable) -> float:
    """Wigner-Yanase skew information ``-Tr([sqrt(rho), H]^2) / 2``."""
    if rho.dim != H.dim:
        raise DimensionMismatch(f"state dim {rho.dim} vs observable dim {H.dim}")
    root = matcore.mat_sqrt_psd(rho.mat)
    comm = root @ H.mat - H.mat @ root
    return _clip(float(-0.5 * np.trace(comm @ comm).real), "skew information")


class MeasureKind(enum.Enum):
    BASIS = "basis"
    OBSERVABLE = "observable"


@dataclass(frozen=True)
class MeasureHandle:
    """Named evaluator. Basis measures take a state; observable measures also take ``H``."""

    name: str
    kind: MeasureKind
    evaluator: Callable = field(repr=False)
    optimizer_backed: bool = False

    def __call__(self, rho: DensityState, H: Observable | None = None) -> float:
        if self.kind is MeasureKind.OBSERVABLE:
            if H is None:
                raise CoherenceError(f"measure {self.name!r} needs an observable")
            return self.evaluator(rho, H)
        return self.evaluator(rho)


MEASURE_NAMES = ("rel-entropy", "l1", "trace-norm", "mod-trace-norm", "skew-info")


def get_measure(name: str, *, tol: float = diagopt.DEFAULT_TOL, seed: int = 0,
                restarts: int = diagopt.RESTARTS) -> MeasureHandle:
    """Look up a measure by its command-line name.

    ``tol``, ``seed`` and ``restarts`` only affect the optimizer-backed
    trace-norm measures.
    """
    if name == "rel-entropy":
        return MeasureHandle(name, MeasureKind.BASIS, relative_entropy_coherence)
    if name == "l1":
        return MeasureHandle(name, MeasureKind.BASIS, l1_coherence)
    if name == "trace-norm":
        return MeasureHandle(name, MeasureKind.BASIS,
                             lambda r: trace_norm_coherence(r, tol, seed, restarts), optimizer_backed=True)
    if name == "mod-trace-norm":
        return MeasureHandle(name, MeasureKind.BASIS,
                             lambda r: modified_trace_norm_coherence(r, tol, seed, restarts), optimizer_backed=True)
    if name == "skew-info":
        return MeasureHandle(name, MeasureKind.OBSERVABLE, skew_information)
    raise KeyError(f"unknown measure {name!r}; choose from {', '.join(MEASURE_NAMES)}")
