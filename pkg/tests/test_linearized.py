import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_params
from ckcool.linearized import build_drift, build_noise, effective_params, linearize
from ckcool.oracle import langevin_drift
from ckcool.params import SystemParams, drive_amplitude, device_defaults
from ckcool.steady import find_steady_states, reconstruct_state, select_branch


def branch_one(p):
    return select_branch(find_steady_states(p), 1)


def test_block_conjugacy_exact(two_mode):
    A = build_drift(two_mode, branch_one(two_mode))
    n = 3
    assert np.array_equal(A[n:, n:], A[:n, :n].conj())
    assert np.array_equal(A[n:, :n], A[:n, n:].conj())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_block_conjugacy_random(seed):
    p = random_params(np.random.default_rng(seed))
    for s in find_steady_states(p):
        A = build_drift(p, s)
        n = p.n_modes + 1
        assert np.array_equal(A[n:, n:], A[:n, :n].conj())
        assert np.array_equal(A[n:, :n], A[:n, n:].conj())


def test_matches_symbolic_langevin_jacobian(two_mode, three_mode):
    for p in (two_mode, three_mode, two_mode.with_power(1e-9 * 5)):
        s = branch_one(p)
        A = build_drift(p, s)
        ref = langevin_drift(p, drive_amplitude(p), s.photon_number)
        assert np.abs(A - ref).max() <= 1e-12 * np.abs(ref).max()


def test_two_mode_entries(two_mode):
    s = branch_one(two_mode)
    A = build_drift(two_mode, s)
    a, (b1, b2) = s.alpha, s.betas
    g, gck = 250.0, 0.25
    assert A[0, 1] == pytest.approx(1j * g * a + 1j * gck * a * b1.conjugate())
    assert A[0, 4] == pytest.approx(1j * g * a + 1j * gck * a * b1)
    assert A[0, 2] == pytest.approx(1j * g * a)
    assert A[1, 0] == pytest.approx(1j * g * a.conjugate() + 1j * gck * a.conjugate() * b1)
    assert A[1, 3] == pytest.approx(1j * g * a + 1j * gck * a * b1)
    assert A[1, 1] == pytest.approx(-1j * (two_mode.mech_frequencies[0] - gck * abs(a) ** 2) - 40.0)
    assert A[2, 2] == pytest.approx(-1j * two_mode.mech_frequencies[1] - 40.0)
    assert A[1, 2] == 0 and A[1, 5] == 0


def test_decoupled_eigenvalues():
    p = device_defaults(ck=(0.0, 0.0), power=0.0)
    s = reconstruct_state(p, 0.0, 0.0)
    A = build_drift(p, s)
    assert np.count_nonzero(A - np.diag(np.diag(A))) == 0
    re = np.sort(np.linalg.eigvals(A).real)
    np.testing.assert_allclose(re, np.sort([-p.cavity_decay] * 2 + [-40.0] * 4), rtol=1e-12)


def test_effective_parameters(two_mode):
    s = branch_one(two_mode)
    delta, omegas = effective_params(two_mode, s)
    assert omegas[1] == two_mode.mech_frequencies[1]
    assert omegas[0] - two_mode.mech_frequencies[0] == pytest.approx(-0.25 * s.photon_number, rel=1e-9)
    assert delta == pytest.approx(s.effective_detuning, rel=1e-14)
    empty = reconstruct_state(two_mode.with_power(0.0), 0.0, 0.0)
    assert effective_params(two_mode, empty) == (two_mode.detuning, two_mode.mech_frequencies)


def test_noise_matrix():
    p = device_defaults()
    Q = build_noise(p)
    assert np.array_equal(Q, Q.T) and np.all(Q >= 0)
    assert np.count_nonzero(Q) == 6
    assert Q[1, 4] == Q[4, 1] == 40.0 * 201
    assert Q[0, 3] == p.cavity_decay
    cold = SystemParams(p.detuning, p.mech_frequencies, p.mech_dampings, p.optomech_couplings,
                        p.ck_couplings, p.cavity_decay, p.laser_frequency, p.input_power, (0.0, 0.0))
    assert build_noise(cold)[2, 5] == 40.0


def test_linearize_bundles(two_mode):
    s = branch_one(two_mode)
    lin = linearize(two_mode, s)
    assert lin.drift.shape == (6, 6) and lin.noise.shape == (6, 6)
    assert lin.effective_detuning == effective_params(two_mode, s)[0]
