import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcoherence import states
from qcoherence.errors import InvalidSpec, NonSquare, NotHermitian, NotPSD, NotUnitTrace
from qcoherence.states import BlockSpec, DensityState

from conftest import eig2x2


def test_make_density_validation():
    assert states.make_density(np.eye(2) / 2).dim == 2
    with pytest.raises(NotUnitTrace, match="unit-trace"):
        states.make_density(np.diag([0.7, 0.4]))
    bad = np.array([[0.5, 0.6], [0.6, 0.5]])
    assert eig2x2(bad)[0] == pytest.approx(-0.1)
    with pytest.raises(NotPSD, match="-1.000e-01"):
        states.make_density(bad)
    with pytest.raises(NotHermitian):
        states.make_density([[0.5, 0.1], [0.0, 0.5]])
    with pytest.raises(NonSquare):
        states.make_density(np.ones((2, 3)) / 2)
    # a looser tolerance admits round-off
    states.make_density(np.diag([0.5, 0.5 + 1e-9]), tol=1e-8)


def test_state_is_read_only():
    rho = states.max_coherent(2)
    with pytest.raises(ValueError):
        rho.mat[0, 0] = 1.0


def test_max_coherent():
    np.testing.assert_array_equal(states.max_coherent(1).mat, [[1]])
    np.testing.assert_allclose(states.max_coherent(2).mat, np.full((2, 2), 0.5))
    m = states.max_coherent(3).mat
    np.testing.assert_allclose(m, np.full((3, 3), 1 / 3))
    assert np.trace(m @ m).real == pytest.approx(1.0)
    with pytest.raises(InvalidSpec):
        states.max_coherent(0)


def test_block_mix_examples():
    rho = states.random_density(3, seed=1)
    np.testing.assert_array_equal(states.block_mix(BlockSpec((1.0,), (rho,))).mat, rho.mat)
    e0 = states.basis_state(1, 0)
    np.testing.assert_allclose(states.block_mix(BlockSpec((0.5, 0.5), (e0, e0))).mat, np.diag([0.5, 0.5]))
    with pytest.raises(InvalidSpec):
        BlockSpec((0.6, 0.6), (e0, e0))
    with pytest.raises(InvalidSpec):
        BlockSpec((1.0,), (e0, e0))


def test_counterexample_state():
    rho, rho1, rho2 = states.counterexample_state()
    m = rho.mat
    np.testing.assert_allclose(m[:2, :2], np.full((2, 2), 0.25))
    np.testing.assert_allclose(m[2:, 2:], np.full((3, 3), 1 / 6))
    assert np.all(m[:2, 2:] == 0) and np.all(m[2:, :2] == 0)
    assert np.trace(m).real == pytest.approx(1.0)
    np.testing.assert_allclose(states.dephase(rho).mat, np.diag([0.25, 0.25, 1 / 6, 1 / 6, 1 / 6]))
    assert rho1 == states.max_coherent(2) and rho2 == states.max_coherent(3)


def test_dephase_and_incoherence(rng):
    np.testing.assert_allclose(states.dephase(states.max_coherent(2)).mat, np.eye(2) / 2)
    diag = states.incoherent_state([0.3, 0.7])
    assert states.dephase(diag) == diag
    assert states.is_incoherent(diag)
    assert not states.is_incoherent(states.max_coherent(2))
    for _ in range(20):
        rho = states.random_density(int(rng.integers(1, 6)), rng=rng)
        deph = states.dephase(rho)
        assert states.is_incoherent(deph)
        assert np.trace(deph.mat).real == pytest.approx(np.trace(rho.mat).real, abs=1e-14)
        assert states.dephase(deph) == deph


def test_random_density():
    pure = states.random_density(2, 1, seed=5)
    assert np.trace(pure.mat @ pure.mat).real == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_array_equal(states.random_density(4, 2, seed=9).mat, states.random_density(4, 2, seed=9).mat)
    full = states.random_density(4, 4, seed=3)
    assert np.linalg.eigvalsh(full.mat)[0] > 0
    assert np.linalg.matrix_rank(states.random_density(5, 2, seed=1).mat, tol=1e-10) == 2
    with pytest.raises(InvalidSpec):
        states.random_density(3, 4, seed=0)
    with pytest.raises(InvalidSpec):
        states.random_density(3, 0, seed=0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.integers(0, 2**32 - 1))
def test_block_mix_spectrum_is_union(dims, seed):
    rng = np.random.default_rng(seed)
    blocks = [states.random_density(d, rng=rng) for d in dims]
    p = states.random_probabilities(len(dims), rng)
    mixed = states.block_mix(BlockSpec(tuple(p), tuple(blocks)))
    expected = np.sort(np.concatenate([pi * np.linalg.eigvalsh(b.mat) for pi, b in zip(p, blocks)]))
    assert mixed.dim == sum(dims)
    np.testing.assert_allclose(np.linalg.eigvalsh(mixed.mat), expected, atol=1e-10)
