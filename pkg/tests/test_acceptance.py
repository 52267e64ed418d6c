"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Sample counts and tolerances are the published minimums; nothing here is
loosened to make a criterion pass.
"""

import json
import time

import numpy as np
import pytest

from qcoherence import cli, diagopt, states
from qcoherence import framework as fw
from qcoherence.diagopt import DiagConstraint
from qcoherence.framework import SuiteConfig
from qcoherence.measures import get_measure

BLOCK_DIMS = (2, 3, 4, 5)
SEED = 20240611


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance] criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def test_criterion_01_max_coherent_values(verdict):
    start = time.perf_counter()
    rows = fw.max_coherent_table((2, 3, 4, 5), tol=1e-6, seed=0)
    elapsed = time.perf_counter() - start
    worst = max(r["residual"] for r in rows)
    verdict(1, worst < 1e-5 and elapsed < 10.0, f"max residual {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_counterexample(verdict, tmp_path, capsys):
    rec = fw.reproduce_counterexample(tol=1e-6, seed=0)
    out = tmp_path / "c3.json"
    code = cli.main(["verify", "--measure", "trace-norm", "--suite", "c3", "--out", str(out)])
    capsys.readouterr()
    (rep,) = json.loads(out.read_text())
    w = rep["witness"] or {}
    _, rho1, rho2 = states.counterexample_state()
    witness_ok = (
        w.get("weights") == [0.5, 0.5]
        and [b["dim"] for b in w.get("blocks", [])] == [2, 3]
        and np.array_equal(np.array(w["blocks"][0]["re"]), rho1.mat.real)
        and np.array_equal(np.array(w["blocks"][1]["re"]), rho2.mat.real)
    )
    checks = {
        "C(rho1)=1": abs(rec["c_tr_rho1"] - 1) < 1e-5,
        "C(rho2)=4/3": abs(rec["c_tr_rho2"] - 4 / 3) < 1e-5,
        "upper bound": rec["lhs_upper_bound"] <= 1 + 1e-5,
        "optimizer": rec["lhs_optimizer"] <= 1 + 1e-5,
        "gap": rec["additivity_gap"] >= 1 / 6 - 1e-3,
        "cli exit 1": code == 1,
        "witness": witness_ok,
    }
    bad = [k for k, v in checks.items() if not v]
    verdict(2, not bad, f"gap {rec['additivity_gap']:.6f}, optimizer {rec['lhs_optimizer']:.8f}, "
                        f"cli exit {code}" + (f", failed {bad}" if bad else ""))


def test_criterion_03_additivity(verdict):
    exact = SuiteConfig(dims=BLOCK_DIMS, samples=500, seed=SEED, tol_exact=1e-8)
    opt = SuiteConfig(dims=BLOCK_DIMS, samples=100, seed=SEED, tol_opt=1e-4)
    reps = [fw.check_c3(get_measure("rel-entropy"), exact), fw.check_c3(get_measure("l1"), exact),
            fw.check_c3(get_measure("mod-trace-norm"), opt)]
    ok = all(r.passed for r in reps) and [r.trials for r in reps] == [500, 500, 100]
    verdict(3, ok, ", ".join(f"{r.measure} {r.trials} specs worst {r.worst_violation:.1e}" for r in reps))


@pytest.mark.parametrize("name", ["rel-entropy", "l1", "trace-norm", "mod-trace-norm"])
def test_criterion_04_monotonicity(verdict, name):
    cfg = SuiteConfig(dims=BLOCK_DIMS, samples=500, seed=SEED, tol_exact=1e-8, tol_opt=1e-4)
    rep = fw.check_c2(get_measure(name), cfg)
    per_kind = (rep.trials - 500) // len(fw.NAMED_CHANNELS)
    ok = rep.passed and per_kind >= 1
    verdict(4, ok, f"{name}: 500 random pairs + {per_kind} x {len(fw.NAMED_CHANNELS)} named, "
                   f"worst {rep.worst_violation:.1e} (tol {rep.tolerance:.0e})")


def test_criterion_05_identities(verdict):
    rec = fw.flag_identity_residuals(trials=100, seed=SEED, dims=(1, 2, 3, 4))
    worst = max(rec["flag_residual"], rec["merge_flag_residual"], rec["round_trip_residual"])
    verdict(5, worst < 1e-10 and rec["trials"] >= 100,
            f"flag {rec['flag_residual']:.1e}, merge {rec['merge_flag_residual']:.1e}, "
            f"round trip {rec['round_trip_residual']:.1e}")


def test_criterion_06_flag_equality(verdict):
    cfg = SuiteConfig(dims=BLOCK_DIMS, samples=200, seed=SEED, tol_exact=1e-8)
    reps = [fw.check_flag_monotonicity(get_measure(n), cfg, equality=True) for n in ("rel-entropy", "l1")]
    verdict(6, all(r.passed for r in reps), ", ".join(f"{r.measure} worst {r.worst_violation:.1e}" for r in reps))


def test_criterion_07_entropy_additivity(verdict):
    rec = fw.entropy_additivity_residual(trials=500, seed=SEED, dims=BLOCK_DIMS)
    verdict(7, rec["max_residual"] < 1e-8, f"{rec['trials']} blocks, max residual {rec['max_residual']:.1e}")


def test_criterion_08_ms_suite(verdict):
    cfg = SuiteConfig(dims=(2, 3, 4), samples=200, seed=SEED, tol_exact=1e-8)
    rep = fw.check_ms(get_measure("skew-info"), SEED, cfg)
    subs = {s.condition: s for s in rep.subreports}
    ok = rep.passed and all(s.trials >= 200 for s in subs.values())
    verdict(8, ok, ", ".join(f"{c} {s.trials} trials worst {s.worst_violation:.1e}" for c, s in subs.items()))


def test_criterion_09_optimizer_soundness(verdict):
    rng = np.random.default_rng(SEED)
    upper = lower = spread = 0.0
    cases = [(DiagConstraint.SIMPLEX, 2 + i % 2) for i in range(50)]
    cases += [(DiagConstraint.NONNEG, 2)] * 10 + [(DiagConstraint.NONNEG, 3)]
    for constraint, d in cases:
        rho = states.random_density(d, rng=rng)
        value = diagopt.minimize_trace_distance(rho, constraint).value
        oracle = diagopt.grid_oracle(rho, constraint, resolution=400, max_points=20_000_000)
        upper = max(upper, value - oracle)
        lower = max(lower, oracle - value)
        starts = np.vstack([np.diag(rho.mat).real[None, :],
                            diagopt.random_starts(d, constraint, 4, rng)])
        runs = [diagopt.minimize_trace_distance(rho, constraint, starts=s[None, :]).value for s in starts]
        spread = max(spread, max(runs) - min(runs))
    ok = upper <= 1e-6 and lower <= 2e-2 and spread < 1e-6
    verdict(9, ok, f"{len(cases)} states, max(opt - oracle) {upper:.1e}, max(oracle - opt) {lower:.1e}, "
                   f"restart spread {spread:.1e}")


def test_criterion_10_controls_and_matrix(verdict):
    zero = fw.check_c1(fw.zero_functional(), SuiteConfig(samples=50, seed=SEED))
    observed = fw.consistency_matrix(SuiteConfig(dims=(2, 3), samples=50, seed=SEED),
                                     SuiteConfig(dims=(2, 3), samples=30, seed=SEED))
    mismatches = [(m, c) for m, conds in fw.EXPECTED_MATRIX.items() for c, want in conds.items()
                  if observed[m][c] != want]
    verdict(10, not zero.passed and not mismatches,
            f"zero functional c1 {'fails' if not zero.passed else 'PASSES'}, matrix mismatches {mismatches}")
