"""Property-based verification of coherence-measure conditions.

Every check draws ``cfg.samples`` random trials (each trial owns a generator
seeded from ``(cfg.seed, check, trial index)``), evaluates a signed
violation per trial, and reports the worst one. A check passes when the
worst violation is at most the applicable tolerance. A pass only certifies
the sampled ensemble; a failure carries a witness that can be replayed
with :func:`replay_witness`.

Violation conventions (positive means the condition is broken):

* ``c1`` / ``m1``: ``C`` on free states; ``2*tol - C`` on resourceful ones,
  so a resourceful state with ``C < tol`` fails.
* ``c2`` / ``m2``: ``C(L(rho)) - C(rho)``.
* ``c3`` / ``m3``: ``|C(p1 rho1 (+) p2 rho2 ...) - sum p_i C(rho_i)|``.
* ``b3``: ``sum_n p_n C(rho_n) - C(rho)`` over selective outcomes.
* ``b4``: ``C(sum p_n rho_n) - sum p_n C(rho_n)``.
* ``flag``: ``C(sum p_n |n><n| (x) rho_n) - sum p_n C(rho_n)``, or its
  absolute value when equality is requested.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import channels as chn
from . import documents as docs
from . import matcore
from .channels import KrausChannel, Observable
from .diagopt import DiagConstraint, minimize_trace_distance
from .measures import MeasureHandle, MeasureKind, get_measure, shannon_entropy, von_neumann_entropy
from .states import (
    BlockSpec,
    DensityState,
    basis_state,
    block_mix,
    counterexample_spec,
    counterexample_state,
    incoherent_state,
    max_coherent,
    offdiag_mass,
    random_density,
    random_probabilities,
)

COHERENT_MASS = 0.05
NONCOMMUTING_GAP = 0.05


@dataclass(frozen=True)
class SuiteConfig:
    dims: tuple[int, ...] = (2, 3)
    samples: int = 50
    seed: int = 0
    tol_exact: float = 1e-8
    tol_opt: float = 1e-4
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1 or not self.dims or min(self.dims) < 1:
            raise ValueError("need samples >= 1 and positive dims")
        if self.tol_exact <= 0 or self.tol_opt <= 0:
            raise ValueError("tolerances must be positive")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    def tol_for(self, m: MeasureHandle) -> float:
        return self.tol_opt if m.optimizer_backed else self.tol_exact


@dataclass
class VerificationReport:
    measure: str
    condition: str
    passed: bool
    trials: int
    worst_violation: float
    tolerance: float
    seed: int
    witness: dict | None = None
    subreports: list["VerificationReport"] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        if not self.subreports:
            d.pop("subreports")
        return d


# ----------------------------------------------------------------- violations
# Each takes the measure and deserialized inputs; witnesses store exactly
# these inputs, which is what makes replay bit-exact.

def _v_c1(m, state, coherent, tol):
    c = m(state)
    return 2 * tol - c if coherent else c


def _v_c2(m, state, channel):
    return m(chn.apply(channel, state)) - m(state)


def _v_c3(m, weights, blocks):
    mixed = block_mix(BlockSpec(tuple(weights), tuple(blocks)))
    return abs(m(mixed) - sum(p * m(b) for p, b in zip(weights, blocks)))


def _v_b3(m, state, channel):
    avg = sum(o.probability * m(o.state) for o in chn.selective_outcomes(channel, state) if not o.null)
    return avg - m(state)


def _v_b4(m, weights, states):
    mixed = DensityState(sum(p * s.mat for p, s in zip(weights, states)), chn.OUTPUT_TOL)
    return m(mixed) - sum(p * m(s) for p, s in zip(weights, states))


def _v_flag(m, weights, states, equality):
    gap = m(chn.flag_state(weights, states)) - sum(p * m(s) for p, s in zip(weights, states))
    return abs(gap) if equality else gap


def _v_m1(m, state, observable, commuting, tol):
    c = m(state, observable)
    return 2 * tol - c if not commuting else c


def _v_m2(m, state, observable, channel):
    return m(chn.apply(channel, state), observable) - m(state, observable)


def _v_m3(m, weights, blocks, observables):
    mixed = block_mix(BlockSpec(tuple(weights), tuple(blocks)))
    H = Observable(matcore.block_diag(*(h.mat for h in observables)))
    return abs(m(mixed, H) - sum(p * m(b, h) for p, b, h in zip(weights, blocks, observables)))


_VIOLATIONS: dict[str, Callable] = {
    "c1": _v_c1, "c2": _v_c2, "c3": _v_c3, "b3": _v_b3, "b4": _v_b4,
    "flag": _v_flag, "m1": _v_m1, "m2": _v_m2, "m3": _v_m3,
}

_STATE_KEYS = {"state"}
_STATE_LIST_KEYS = {"blocks", "states"}


def _serialize(check: str, inputs: dict) -> dict:
    out = {"check": check}
    for k, v in inputs.items():
        if isinstance(v, DensityState):
            out[k] = docs.state_to_doc(v)
        elif isinstance(v, KrausChannel):
            out[k] = docs.channel_to_doc(v)
        elif isinstance(v, Observable):
            out[k] = docs.observable_to_doc(v)
        elif k in _STATE_LIST_KEYS:
            out[k] = [docs.state_to_doc(s) for s in v]
        elif k == "observables":
            out[k] = [docs.observable_to_doc(h) for h in v]
        elif k == "weights":
            out[k] = [float(p) for p in v]
        else:
            out[k] = v
    return out


def _deserialize(witness: dict) -> tuple[str, dict]:
    inputs = {}
    for k, v in witness.items():
        if k == "check":
            continue
        if k in _STATE_KEYS:
            inputs[k] = docs.state_from_doc(v, chn.OUTPUT_TOL)
        elif k == "channel":
            inputs[k] = docs.channel_from_doc(v)
        elif k == "observable":
            inputs[k] = docs.observable_from_doc(v)
        elif k in _STATE_LIST_KEYS:
            inputs[k] = [docs.state_from_doc(s, chn.OUTPUT_TOL) for s in v]
        elif k == "observables":
            inputs[k] = [docs.observable_from_doc(h) for h in v]
        else:
            inputs[k] = v
    return witness["check"], inputs


def replay_witness(m: MeasureHandle, witness: dict) -> float:
    """Recompute the violation recorded by a witness."""
    check, inputs = _deserialize(witness)
    return float(_VIOLATIONS[check](m, **inputs))


# ------------------------------------------------------------------ sampling

def _trial_rng(seed: int, salt: str, i: int) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(salt.encode()), i])


def _rand_state(d: int, rng) -> DensityState:
    return random_density(d, int(rng.integers(1, d + 1)), rng=rng)


def _rand_coherent(d: int, rng) -> DensityState:
    while True:
        rho = _rand_state(d, rng)
        if offdiag_mass(rho) >= COHERENT_MASS:
            return rho


def _rand_incoherent(d: int, rng) -> DensityState:
    p = random_probabilities(d, rng)
    if d > 1 and rng.random() < 0.3:
        p[rng.integers(d)] = 0.0
        p /= p.sum()
    return incoherent_state(p)


def _rand_blockspec(n_blocks: int, dims, rng) -> BlockSpec:
    blocks = tuple(_rand_state(int(rng.choice(dims)), rng) for _ in range(n_blocks))
    return BlockSpec(tuple(random_probabilities(n_blocks, rng)), blocks)


def _run(m: MeasureHandle, check: str, cfg: SuiteConfig, n_trials: int,
         sampler: Callable[[np.random.Generator, int], dict], condition: str | None = None) -> VerificationReport:
    tol = cfg.tol_for(m)
    condition = condition or check

    def trial(i):
        inputs = sampler(_trial_rng(cfg.seed, condition, i), i)
        return float(_VIOLATIONS[check](m, **inputs)), inputs

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(trial, range(n_trials)))
    else:
        results = [trial(i) for i in range(n_trials)]
    worst_i = max(range(n_trials), key=lambda i: results[i][0])
    worst, inputs = results[worst_i]
    passed = worst <= tol
    witness = None if passed else _serialize(check, inputs)
    return VerificationReport(m.name, condition, passed, n_trials, worst, tol, cfg.seed, witness)


def _require(m: MeasureHandle, kind: MeasureKind):
    if m.kind is not kind:
        raise ValueError(f"measure {m.name!r} is not a {kind.value} measure")


# -------------------------------------------------------------------- checks

def check_c1(m: MeasureHandle, cfg: SuiteConfig) -> VerificationReport:
    """Zero on incoherent states, strictly above tolerance on clearly coherent ones."""
    _require(m, MeasureKind.BASIS)
    tol = cfg.tol_for(m)

    def sample(rng, i):
        d = int(rng.choice(cfg.dims))
        if i % 2 == 0:
            return {"state": _rand_incoherent(d, rng), "coherent": False, "tol": tol}
        return {"state": _rand_coherent(max(d, 2), rng), "coherent": True, "tol": tol}

    return _run(m, "c1", cfg, 2 * cfg.samples, sample)


def _named_channel_trial(kind: str, rng, dims) -> dict:
    n1, n2 = (int(x) for x in rng.choice(dims, size=2))
    if kind == "projector":
        return {"state": _rand_state(n1 + n2, rng), "channel": chn.projector_channel(n1, n2)}
    if kind == "embed":
        return {"state": _rand_state(n1, rng), "channel": chn.embed_channel(n1, n2)}
    if kind == "truncate":
        return {"state": _rand_state(n1 + n2, rng), "channel": chn.truncate_channel(n1, n2)}
    N = int(rng.integers(2, 4))
    if kind == "flag":
        inner = chn.random_incoherent_channel(n1, N, rng=rng)
        return {"state": _rand_state(N * n1, rng), "channel": chn.flag_channel_b3(inner)}
    if kind == "merge-flag":
        return {"state": _rand_state(N * n1, rng), "channel": chn.merge_flag_channel(N, n1)}
    raise ValueError(kind)


NAMED_CHANNELS = ("projector", "embed", "truncate", "flag", "merge-flag")


def check_c2(m: MeasureHandle, cfg: SuiteConfig, named_per_kind: int | None = None) -> VerificationReport:
    """Monotonicity under random incoherent channels and the named constructions.

    The first ``cfg.samples`` trials pair a random state with a random
    incoherent channel; then ``named_per_kind`` trials run for each named
    construction (default ``max(2, samples // 20)``).
    """
    _require(m, MeasureKind.BASIS)
    per_kind = max(2, cfg.samples // 20) if named_per_kind is None else named_per_kind

    def sample(rng, i):
        if i < cfg.samples:
            d = int(rng.choice(cfg.dims))
            return {"state": _rand_state(d, rng),
                    "channel": chn.random_incoherent_channel(d, int(rng.integers(1, 5)), rng=rng)}
        kind = NAMED_CHANNELS[(i - cfg.samples) // per_kind]
        return _named_channel_trial(kind, rng, cfg.dims)

    return _run(m, "c2", cfg, cfg.samples + per_kind * len(NAMED_CHANNELS), sample)


def check_c3(m: MeasureHandle, cfg: SuiteConfig) -> VerificationReport:
    """Additivity over block-diagonal states; trial 0 is always the qubit/qutrit counterexample."""
    _require(m, MeasureKind.BASIS)

    def sample(rng, i):
        spec = counterexample_spec() if i == 0 else _rand_blockspec(2 + i % 2, cfg.dims, rng)
        return {"weights": list(spec.weights), "blocks": list(spec.blocks)}

    return _run(m, "c3", cfg, cfg.samples, sample)


def check_b3(m: MeasureHandle, cfg: SuiteConfig) -> VerificationReport:
    """Monotonicity on average under selective incoherent measurements."""
    _require(m, MeasureKind.BASIS)

    def sample(rng, i):
        d = int(rng.choice(cfg.dims))
        return {"state": _rand_state(d, rng),
                "channel": chn.random_incoherent_channel(d, int(rng.integers(1, 5)), rng=rng)}

    return _run(m, "b3", cfg, cfg.samples, sample)


def _ensemble(rng, dims, sizes=(2, 3)):
    d = int(rng.choice(dims))
    n = int(rng.choice(sizes))
    return list(random_probabilities(n, rng)), [_rand_state(d, rng) for _ in range(n)]


def check_b4(m: MeasureHandle, cfg: SuiteConfig) -> VerificationReport:
    """Convexity: mixing never increases the measure."""
    _require(m, MeasureKind.BASIS)

    def sample(rng, i):
        weights, states = _ensemble(rng, cfg.dims)
        return {"weights": weights, "states": states}

    return _run(m, "b4", cfg, cfg.samples, sample)


def check_flag_monotonicity(m: MeasureHandle, cfg: SuiteConfig, equality: bool = False) -> VerificationReport:
    """``C(sum p_n |n><n| (x) rho_n) <= sum p_n C(rho_n)``; with ``equality`` the two must agree."""
    _require(m, MeasureKind.BASIS)

    def sample(rng, i):
        weights, states = _ensemble(rng, cfg.dims, sizes=(1, 2, 3))
        return {"weights": weights, "states": states, "equality": equality}

    return _run(m, "flag", cfg, cfg.samples, sample)


def _observable_rng(H_seed, salt, i):
    return _trial_rng(H_seed, "H-" + salt, i)


def check_ms(m: MeasureHandle, H_sampler_seed: int, cfg: SuiteConfig) -> VerificationReport:
    """Observable-relative conditions M1 (faithfulness), M2 (monotonicity under
    translationally invariant channels) and M3 (block additivity with
    ``H = H_1 (+) H_2 (+) ...``), reported as sub-reports of one record."""
    _require(m, MeasureKind.OBSERVABLE)
    tol = cfg.tol_for(m)

    def sample_m1(rng, i):
        d = max(int(rng.choice(cfg.dims)), 2)
        H = chn.random_nondegenerate_observable(d, _observable_rng(H_sampler_seed, "m1", i))
        if i % 2 == 0:
            _, v = matcore.herm_eig(H.mat)
            p = random_probabilities(d, rng)
            return {"state": DensityState((v * p) @ v.conj().T), "observable": H, "commuting": True, "tol": tol}
        while True:
            rho = _rand_state(d, rng)
            if np.max(np.abs(rho.mat @ H.mat - H.mat @ rho.mat)) >= NONCOMMUTING_GAP:
                return {"state": rho, "observable": H, "commuting": False, "tol": tol}

    def sample_m2(rng, i):
        d = int(rng.choice(cfg.dims))
        H = chn.random_nondegenerate_observable(d, _observable_rng(H_sampler_seed, "m2", i))
        return {"state": _rand_state(d, rng), "observable": H,
                "channel": chn.random_ti_channel(H, rng, int(rng.integers(1, 4)))}

    def sample_m3(rng, i):
        spec = _rand_blockspec(2 + i % 2, cfg.dims, rng)
        hrng = _observable_rng(H_sampler_seed, "m3", i)
        hs = [chn.random_nondegenerate_observable(b.dim, hrng) for b in spec.blocks]
        return {"weights": list(spec.weights), "blocks": list(spec.blocks), "observables": hs}

    subs = [
        _run(m, "m1", cfg, 2 * cfg.samples, sample_m1),
        _run(m, "m2", cfg, cfg.samples, sample_m2),
        _run(m, "m3", cfg, cfg.samples, sample_m3),
    ]
    worst = max(subs, key=lambda r: r.worst_violation - r.tolerance)
    return VerificationReport(m.name, "ms", all(r.passed for r in subs), sum(r.trials for r in subs),
                              worst.worst_violation, tol, cfg.seed, worst.witness, subs)


BASIS_SUITE = {
    "c1": check_c1, "c2": check_c2, "c3": check_c3,
    "b3": check_b3, "b4": check_b4, "flag": check_flag_monotonicity,
}
SUITE_NAMES = (*BASIS_SUITE, "ms")


def run_suite(m: MeasureHandle, names, cfg: SuiteConfig, *, flag_equality: bool = False) -> list[VerificationReport]:
    out = []
    for name in names:
        if name == "ms":
            out.append(check_ms(m, cfg.seed, cfg))
        elif name == "flag":
            out.append(check_flag_monotonicity(m, cfg, equality=flag_equality))
        elif name in BASIS_SUITE:
            out.append(BASIS_SUITE[name](m, cfg))
        else:
            raise KeyError(f"unknown condition {name!r}")
    return out


# --------------------------------------------------------- negative controls

def zero_functional() -> MeasureHandle:
    return MeasureHandle("zero", MeasureKind.BASIS, lambda rho: 0.0)


def offdiag_square_functional() -> MeasureHandle:
    """Largest off-diagonal modulus of ``rho^2``; not a monotone."""
    def f(rho):
        sq = rho.mat @ rho.mat
        return float(np.max(np.abs(sq - np.diag(np.diag(sq))), initial=0.0))
    return MeasureHandle("offdiag-square", MeasureKind.BASIS, f)


# ------------------------------------------------------ expected behaviour

EXPECTED_MATRIX = {
    "rel-entropy": {"c1": True, "c2": True, "c3": True, "b3": True, "b4": True, "flag": True},
    "l1": {"c1": True, "c2": True, "c3": True, "b3": True, "b4": True, "flag": True},
    "mod-trace-norm": {"c1": True, "c2": True, "c3": True},
    "trace-norm": {"c1": True, "c2": True, "b4": True, "c3": False},
    "skew-info": {"m1": True, "m2": True, "m3": True},
}


def consistency_matrix(cfg: SuiteConfig, opt_cfg: SuiteConfig | None = None) -> dict[str, dict[str, bool]]:
    """Run every cell of :data:`EXPECTED_MATRIX` and return the observed pass flags.

    ``opt_cfg`` (defaults to ``cfg``) is used for the optimizer-backed measures.
    """
    opt_cfg = opt_cfg or cfg
    out = {}
    for name, conds in EXPECTED_MATRIX.items():
        m = get_measure(name, seed=cfg.seed)
        c = opt_cfg if m.optimizer_backed else cfg
        if m.kind is MeasureKind.OBSERVABLE:
            rep = check_ms(m, c.seed, c)
            out[name] = {r.condition: r.passed for r in rep.subreports}
        else:
            out[name] = {k: run_suite(m, [k], c)[0].passed for k in conds}
    return out


# ----------------------------------------------------- derivation identities

def reproduce_counterexample(tol: float = 1e-6, seed: int = 0) -> dict:
    """Numbers behind the failure of additivity for the trace-norm measure."""
    rho, rho1, rho2 = counterexample_state()
    tn = get_measure("trace-norm", tol=tol, seed=seed)
    c1, c2 = tn(rho1), tn(rho2)
    delta0 = np.diag([0.5, 0.5, 0.0, 0.0, 0.0])
    upper = matcore.trace_norm(rho.mat - delta0)
    opt = minimize_trace_distance(rho, DiagConstraint.SIMPLEX, tol, seed)
    rhs = 0.5 * c1 + 0.5 * c2
    lhs = min(opt.value, upper)
    return {
        "c_tr_rho1": c1,
        "c_tr_rho2": c2,
        "rhs": rhs,
        "lhs_upper_bound": upper,
        "lhs_optimizer": opt.value,
        "lhs_argmin": list(opt.argmin),
        "additivity_gap": rhs - lhs,
        "additivity_fails": rhs - lhs >= 7 / 6 - 1 - 2 * tol,
    }


def flag_identity_residuals(trials: int = 20, seed: int = 0, dims=(2, 3, 4)) -> dict:
    """Worst entrywise residuals of the flag, merge-flag and embed/truncate identities."""
    r7 = r13 = rt = 0.0
    for i in range(trials):
        rng = _trial_rng(seed, "identities", i)
        d = int(rng.choice(dims))
        N = int(rng.integers(1, 5))
        rho = _rand_state(d, rng)
        ch = chn.random_incoherent_channel(d, N, rng=rng)
        start = np.kron(basis_state(N, 0).mat, rho.mat)
        out = chn.apply_matrix(chn.flag_channel_b3(ch), start)
        expected = np.zeros_like(out)
        for o in chn.selective_outcomes(ch, rho):
            if not o.null:
                expected += o.probability * np.kron(basis_state(N, o.index).mat, o.state.mat)
        r7 = max(r7, float(np.max(np.abs(out - expected))))

        weights, states = list(random_probabilities(N, rng)), [_rand_state(d, rng) for _ in range(N)]
        out = chn.apply_matrix(chn.merge_flag_channel(N, d), chn.flag_state(weights, states).mat)
        avg = sum(p * s.mat for p, s in zip(weights, states))
        r13 = max(r13, float(np.max(np.abs(out - np.kron(basis_state(N, 0).mat, avg)))))

        n2 = int(rng.choice(dims))
        back = chn.apply_matrix(chn.truncate_channel(d, n2), chn.apply_matrix(chn.embed_channel(d, n2), rho.mat))
        rt = max(rt, float(np.max(np.abs(back - rho.mat))))
    return {"trials": trials, "flag_residual": r7, "merge_flag_residual": r13, "round_trip_residual": rt}


def entropy_additivity_residual(trials: int = 500, seed: int = 0, dims=(2, 3, 4, 5)) -> dict:
    """Worst gap in ``S(p1 rho1 (+) p2 rho2) = H(p1, p2) + p1 S(rho1) + p2 S(rho2)``."""
    worst = 0.0
    for i in range(trials):
        rng = _trial_rng(seed, "entropy", i)
        spec = _rand_blockspec(2, dims, rng)
        lhs = von_neumann_entropy(block_mix(spec))
        rhs = shannon_entropy(spec.weights) + sum(p * von_neumann_entropy(b) for p, b in zip(spec.weights, spec.blocks))
        worst = max(worst, abs(lhs - rhs))
    return {"trials": trials, "max_residual": worst}


def max_coherent_table(dims=(2, 3, 4, 5), tol: float = 1e-6, seed: int = 0) -> list[dict]:
    tn = get_measure("trace-norm", tol=tol, seed=seed)
    rows = []
    for d in dims:
        value = tn(max_coherent(d))
        expected = 2 * (d - 1) / d
        rows.append({"d": d, "computed": value, "expected": expected, "residual": abs(value - expected)})
    return rows
