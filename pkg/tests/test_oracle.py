import math
import warnings

import numpy as np
import pytest

from ckcool.errors import SolverError, ValidationError
from ckcool.oracle import (OracleReport, RangeWarning, default_integration, dense_scan_roots,
                           first_crossing, integrate_covariance, langevin_drift, langevin_noise,
                           photon_equation)
from ckcool.params import SystemParams, drive_amplitude, device_defaults


def uncoupled(n_th=(100.0, 100.0)):
    p = device_defaults(ck=(0.0, 0.0))
    return SystemParams(p.detuning, p.mech_frequencies, p.mech_dampings, (0.0, 0.0), (0.0, 0.0),
                        p.cavity_decay, p.laser_frequency, p.input_power, n_th)


def test_scan_linear_cavity():
    p = uncoupled()
    eps = drive_amplitude(p)
    roots = dense_scan_roots(p, eps, n_points=1_000_000)
    assert len(roots) == 1
    lo, hi = roots[0]
    x = eps ** 2 / (p.cavity_decay ** 2 + p.detuning ** 2)
    assert lo <= x * (1 + 1e-12) and hi >= x * (1 - 1e-12)
    assert hi - lo <= 1e-12 * hi


def test_scan_zero_drive():
    assert dense_scan_roots(device_defaults(power=0.0), 0.0) == [(0.0, 0.0)]


def test_scan_requires_points():
    with pytest.raises(ValidationError):
        dense_scan_roots(uncoupled(), 1.0, n_points=1000)


def test_scan_range_warning():
    p = uncoupled()
    eps = drive_amplitude(p)
    with pytest.warns(RangeWarning):
        dense_scan_roots(p, eps, x_max=1e-5 * eps ** 2 / p.cavity_decay ** 2, n_points=1_000_000)


def test_photon_equation_at_scan_root():
    p = device_defaults()
    eps = drive_amplitude(p)
    for lo, hi in dense_scan_roots(p, eps, n_points=1_000_000):
        assert np.sign(photon_equation(p, eps, lo)) != np.sign(photon_equation(p, eps, hi))


def test_integration_scalar_decay():
    c = 3.0
    Q = np.array([[2.0, 1.0], [1.0, 4.0]])
    t = 20 / c
    V = integrate_covariance(-c * np.eye(2), Q, t, 1e-3)
    exact = Q * (1 - math.exp(-2 * c * t)) / (2 * c)
    np.testing.assert_allclose(V, exact, rtol=1e-8)


def test_integration_thermal():
    p = uncoupled((7.0, 30.0))
    A = langevin_drift(p, 0.0, 0.0)
    t_end, dt = default_integration(A)
    V = integrate_covariance(A, langevin_noise(p), t_end, dt)
    assert V[4, 1].real == pytest.approx(7.5, rel=1e-8)
    assert V[5, 2].real == pytest.approx(30.5, rel=1e-8)


def test_integration_dt_too_large():
    with pytest.raises(SolverError):
        integrate_covariance(-np.eye(2) * 10, np.eye(2), 1.0, 0.5)


def test_default_integration_needs_stable():
    with pytest.raises(ValidationError):
        default_integration(np.diag([-1.0, 1.0]))


def test_report():
    r = OracleReport.compare("x", 1.0 + 1e-9, 1.0, 1e-8)
    assert r.passed and r.deviation == pytest.approx(1e-9)
    assert not OracleReport.compare("x", 1.1, 1.0, 1e-8).passed
    assert r.line().startswith("PASS")


def test_first_crossing():
    assert first_crossing([5, 3, float("nan"), 2, 0.5, 0.2], [0, 1, 2, 3, 4, 5]) == (3.0, 4.0)
    assert first_crossing([5, 3], [0, 1]) is None
