import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import UW, params_from
from ckcool.covariance import (check_stability, dark_mode_occupation, lyapunov_residual,
                               phonon_numbers, solve_lyapunov, stability_report, steady_covariance)
from ckcool.errors import UnstableError
from ckcool.linearized import build_noise, linearize
from ckcool.params import SystemParams, device_defaults
from ckcool.steady import find_steady_states, reconstruct_state, select_branch
from ckcool.sweep import evaluate_point


def chain(p):
    s = select_branch(find_steady_states(p), 1)
    lin = linearize(p, s)
    return lin, steady_covariance(lin.drift, lin.noise, p.n_modes, p.cavity_decay)


def uncoupled(n, n_th, power=1e-9):
    base = device_defaults(n_modes=n, ck=(0.0,) * n, power=power)
    return SystemParams(base.detuning, base.mech_frequencies, base.mech_dampings, (0.0,) * n, (0.0,) * n,
                        base.cavity_decay, base.laser_frequency, power, tuple(n_th))


def test_scalar_identity():
    rng = np.random.default_rng(0)
    Q = rng.normal(size=(4, 4))
    Q = Q + Q.T
    V = solve_lyapunov(-2.5 * np.eye(4), Q)
    np.testing.assert_allclose(V, Q / 5.0, rtol=1e-14, atol=1e-15)


def test_diagonal_componentwise():
    lam = np.array([-1.0 + 2j, -0.5, -3.0 - 1j])
    Q = np.array([[1.0, 2.0, 0.5], [2.0, 3.0, 1.0], [0.5, 1.0, 4.0]])
    V = solve_lyapunov(np.diag(lam), Q)
    np.testing.assert_allclose(V, -Q / (lam[:, None] + lam[None, :]), rtol=1e-13)


def test_refuses_unstable():
    with pytest.raises(UnstableError):
        solve_lyapunov(np.diag([-1.0, 0.1]), np.eye(2))


def test_stability_classes():
    assert check_stability(-np.eye(3), 1.0)
    assert stability_report(np.diag([-1.0, 1e-9]), 1.0).status == "marginal"
    rep = stability_report(np.diag([-1.0, 2.0]), 1.0)
    assert rep.status == "unstable" and not rep.turning_point_stable
    # complex pair in the right half plane keeps det(-A) > 0
    rep = stability_report(np.diag([-1.0, 0.5 + 1j, 0.5 - 1j]), 1.0)
    assert rep.status == "unstable" and rep.turning_point_stable


def test_decoupled_is_stable():
    p = device_defaults(power=0.0)
    lin = linearize(p, reconstruct_state(p, 0.0, 0.0))
    assert check_stability(lin.drift, p.cavity_decay)


def test_middle_branch_unstable():
    p = device_defaults(ck=(0.0, 0.0), power=1e-2 * UW)
    states = find_steady_states(p)
    assert len(states) == 3
    lin = linearize(p, states[1])
    assert not check_stability(lin.drift, p.cavity_decay)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_thermal_fixed_point(n):
    n_th = [100.0, 37.5, 0.0, 12.0][:n]
    p = uncoupled(n, n_th)
    _, cov = chain(p)
    for got, want in zip(cov.phonons, n_th):
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_fixture_covariance(derived):
    entry = derived["fig3a_covariance"]
    lin, cov = chain(params_from(entry))
    ref = np.array(entry["V_real"]) + 1j * np.array(entry["V_imag"])
    mask = np.abs(ref) > 1e-12 * np.abs(ref).max()
    assert np.all(np.abs(cov.V - ref)[mask] <= 1e-6 * np.abs(ref)[mask])
    assert np.all(np.abs(cov.V[~mask]) <= 1e-9 * np.abs(ref).max())
    np.testing.assert_allclose(cov.phonons, entry["phonons"], rtol=1e-6)


def test_fixture_three_mode_phonons(derived):
    entry = derived["fig4b_covariance"]
    _, cov = chain(params_from(entry))
    np.testing.assert_allclose(cov.phonons, entry["phonons"], rtol=1e-6)


def test_covariance_symmetric_and_residual(two_mode):
    lin, cov = chain(two_mode)
    assert np.array_equal(cov.V, cov.V.T)
    assert cov.lyapunov_residual == lyapunov_residual(lin.drift, cov.V, lin.noise) <= 1e-8
    assert all(n >= 0 for n in cov.phonons)


def test_cooled_above_critical_power():
    _, cov = chain(device_defaults(power=1e-3 * UW))
    assert cov.phonons[0] < 1 and cov.phonons[1] < 1


def test_dark_mode_intact_without_ck():
    p = device_defaults(ck=(0.0, 0.0), power=1e-3 * UW)
    _, cov = chain(p)
    bright, dark = dark_mode_occupation(cov.V, p)
    assert dark == pytest.approx(100.0, rel=1e-6)
    assert bright < 1


def test_dark_mode_broken_with_ck(two_mode):
    _, cov = chain(two_mode)
    _, dark = dark_mode_occupation(cov.V, two_mode)
    assert dark < 100.0


def test_dark_basis_algebra():
    # congruence arithmetic on a hand-built symmetric V
    rng = np.random.default_rng(1)
    M = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    V = M + M.T
    p = device_defaults()
    bright, dark = dark_mode_occupation(V, p)
    v = lambda i, j: V[i, j]
    assert bright == pytest.approx(0.5 * (v(4, 1) + v(4, 2) + v(5, 1) + v(5, 2)).real - 0.5)
    assert dark == pytest.approx(0.5 * (v(4, 1) - v(4, 2) - v(5, 1) + v(5, 2)).real - 0.5)


@settings(max_examples=20, deadline=None)
@given(st.floats(-6.0, -1.5))
def test_residual_on_every_accepted_solve(log_p):
    rec = evaluate_point(device_defaults(power=10 ** log_p * UW))
    if rec.status == "ok":
        assert rec.lyapunov_residual <= 1e-8


def test_phonon_numbers_index():
    V = np.zeros((6, 6))
    V[4, 1] = 3.5
    V[5, 2] = 0.5
    assert phonon_numbers(V, 2) == (3.0, 0.0)


def test_zero_bath_zero_phonons():
    p = uncoupled(2, (0.0, 0.0))
    lin = linearize(p, reconstruct_state(p, 0.0, 0.0))
    Q = build_noise(p)
    V = solve_lyapunov(lin.drift, Q)
    assert max(abs(n) for n in phonon_numbers(V, 2)) < 1e-12
