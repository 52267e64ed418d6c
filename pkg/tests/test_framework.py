import json

import numpy as np
import pytest

from qcoherence import framework as fw
from qcoherence import measures, states
from qcoherence.framework import SuiteConfig

SMALL = SuiteConfig(dims=(2, 3), samples=12, seed=5)


def test_suite_config_validation():
    with pytest.raises(ValueError):
        SuiteConfig(samples=0)
    with pytest.raises(ValueError):
        SuiteConfig(dims=())
    with pytest.raises(ValueError):
        SuiteConfig(tol_exact=0.0)
    assert SMALL.tol_for(measures.get_measure("l1")) == 1e-8
    assert SMALL.tol_for(measures.get_measure("trace-norm")) == 1e-4


@pytest.mark.parametrize("cond", ["c1", "c2", "c3", "b3", "b4", "flag"])
def test_exact_measures_pass_basis_conditions(cond):
    for name in ("rel-entropy", "l1"):
        (rep,) = fw.run_suite(measures.get_measure(name), [cond], SMALL)
        assert rep.passed, rep.to_dict()
        assert rep.witness is None and rep.trials >= SMALL.samples


def test_trial_counts():
    m = measures.get_measure("l1")
    assert fw.check_c1(m, SMALL).trials == 24
    assert fw.check_c2(m, SMALL).trials == 12 + 2 * 5
    assert fw.check_c2(m, SMALL, named_per_kind=3).trials == 12 + 15
    assert fw.check_c3(m, SMALL).trials == 12


def test_determinism_byte_for_byte():
    m = measures.get_measure("rel-entropy")
    a = [r.to_dict() for r in fw.run_suite(m, ["c1", "c2", "b4"], SMALL)]
    b = [r.to_dict() for r in fw.run_suite(m, ["c1", "c2", "b4"], SMALL)]
    assert json.dumps(a) == json.dumps(b)


def test_threaded_run_matches_sequential():
    m = measures.get_measure("l1")
    seq = fw.check_c2(m, SMALL).to_dict()
    par = fw.check_c2(m, SuiteConfig(dims=(2, 3), samples=12, seed=5, workers=4)).to_dict()
    assert seq == par


def test_trace_norm_fails_c3_with_counterexample_witness():
    m = measures.get_measure("trace-norm")
    rep = fw.check_c3(m, SuiteConfig(samples=4, seed=7))
    assert not rep.passed
    assert rep.worst_violation == pytest.approx(1 / 6, abs=1e-5)
    w = rep.witness
    assert w["check"] == "c3" and w["weights"] == [0.5, 0.5]
    assert [b["dim"] for b in w["blocks"]] == [2, 3]
    _, rho1, rho2 = states.counterexample_state()
    np.testing.assert_array_equal(np.array(w["blocks"][0]["re"]), rho1.mat.real)
    assert fw.replay_witness(m, w) == pytest.approx(rep.worst_violation, abs=1e-12)


def test_witness_replay_negative_controls():
    zero = fw.zero_functional()
    rep = fw.check_c1(zero, SMALL)
    assert not rep.passed and rep.witness["coherent"] is True
    assert rep.worst_violation == pytest.approx(2e-8)
    assert fw.replay_witness(zero, rep.witness) == rep.worst_violation
    # a serialized witness survives a JSON round trip
    assert fw.replay_witness(zero, json.loads(json.dumps(rep.witness))) == rep.worst_violation


def test_offdiag_square_fails_c2():
    m = fw.offdiag_square_functional()
    rep = fw.check_c2(m, SuiteConfig(dims=(2, 3), samples=40, seed=0))
    if rep.passed:
        pytest.skip("sampled ensemble did not expose the non-monotone functional")
    assert rep.worst_violation > rep.tolerance
    assert fw.replay_witness(m, rep.witness) == rep.worst_violation


def test_offdiag_square_violation_by_hand():
    # rho = [[a, c, 0], [c, b, 0], [0, 0, e]] has (rho^2)_01 = c (a + b). Moving the
    # weight of |2> onto |1> is incoherent and raises that entry to c (a + b + e) = c.
    from qcoherence import channels as chn

    a, b, c, e = 0.3, 0.3, 0.2, 0.4
    rho = states.DensityState(np.array([[a, c, 0], [c, b, 0], [0, 0, e]]))
    k1 = np.diag([1.0, 1.0, 0.0])
    k2 = np.zeros((3, 3))
    k2[1, 2] = 1.0
    ch = chn.KrausChannel([k1, k2])
    assert chn.is_incoherent_channel(ch)
    m = fw.offdiag_square_functional()
    assert m(rho) == pytest.approx(c * (a + b))
    assert m(chn.apply(ch, rho)) == pytest.approx(c)
    assert fw._v_c2(m, rho, ch) == pytest.approx(c * e)


def test_flag_equality_mode():
    m = measures.get_measure("l1")
    rep = fw.check_flag_monotonicity(m, SMALL, equality=True)
    assert rep.passed and rep.worst_violation >= 0


def test_ms_suite_structure():
    m = measures.get_measure("skew-info")
    rep = fw.check_ms(m, 3, SMALL)
    assert rep.passed
    assert [s.condition for s in rep.subreports] == ["m1", "m2", "m3"]
    assert rep.trials == 24 + 12 + 12
    assert "subreports" in rep.to_dict()
    with pytest.raises(ValueError):
        fw.check_ms(measures.get_measure("l1"), 3, SMALL)
    with pytest.raises(ValueError):
        fw.check_c1(m, SMALL)


def test_run_suite_rejects_unknown():
    with pytest.raises(KeyError):
        fw.run_suite(measures.get_measure("l1"), ["c9"], SMALL)


def test_reproduce_counterexample_record():
    rec = fw.reproduce_counterexample()
    assert rec["c_tr_rho1"] == pytest.approx(1.0, abs=1e-5)
    assert rec["c_tr_rho2"] == pytest.approx(4 / 3, abs=1e-5)
    assert rec["rhs"] == pytest.approx(7 / 6, abs=1e-5)
    assert rec["lhs_upper_bound"] == pytest.approx(1.0, abs=1e-12)
    assert rec["lhs_optimizer"] <= 1 + 1e-5
    assert rec["additivity_fails"]


def test_identity_and_entropy_residuals():
    rec = fw.flag_identity_residuals(trials=10)
    assert max(rec["flag_residual"], rec["merge_flag_residual"], rec["round_trip_residual"]) < 1e-10
    assert fw.entropy_additivity_residual(trials=50)["max_residual"] < 1e-8


def test_max_coherent_table():
    rows = fw.max_coherent_table((2, 3))
    assert [r["expected"] for r in rows] == [1.0, 4 / 3]
    assert all(r["residual"] < 1e-5 for r in rows)


def test_consistency_matrix_shape():
    assert set(fw.EXPECTED_MATRIX) == set(measures.MEASURE_NAMES)
    assert fw.EXPECTED_MATRIX["trace-norm"]["c3"] is False
