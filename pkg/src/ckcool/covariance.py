"""Stability checks, steady covariance from the Lyapunov equation, phonons.

The covariance V_ij = <u_i u_j + u_j u_i>/2 of the fluctuation vector obeys
A V + V A^T = -Q with the plain transpose, since u mixes operators and their
adjoints.  Final occupations are n_j = V[db_j^+, db_j] - 1/2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ResidualError, SolverError, UnstableError, ValidationError
from .params import SystemParams

STAB_RTOL = 1e-6          # marginal band is |max Re(lambda)| <= STAB_RTOL * kappa
LYAP_RTOL = 1e-8
IMAG_ATOL = 1e-9


class StabilityReport(NamedTuple):
    max_real: float
    status: str                  # 'stable' | 'marginal' | 'unstable'
    turning_point_stable: bool   # det(-A) > 0


@dataclass(frozen=True)
class CovarianceResult:
    V: np.ndarray
    lyapunov_residual: float
    phonons: tuple
    stable: bool


def _eigvals(A):
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigenvalue solver did not converge: {exc}") from exc


def stability_report(A, kappa) -> StabilityReport:
    """Routh-Hurwitz classification plus the turning-point condition.

    ``status`` is 'stable' when every eigenvalue has Re < -STAB_RTOL*kappa and
    'marginal' when the largest real part lies inside that band.  The
    turning-point flag is the constant-term Hurwitz condition det(-A) > 0 on
    its own; it flips sign exactly where the photon-number response curve
    turns over, so it separates the rising and falling segments of an S-curve.
    """
    lam = _eigvals(A)
    max_real = float(lam.real.max())
    tol = STAB_RTOL * kappa
    if max_real < -tol:
        status = "stable"
    elif max_real <= tol:
        status = "marginal"
    else:
        status = "unstable"
    unit = -lam / np.abs(lam)
    det_sign = np.prod(unit).real if np.all(np.abs(lam) > 0) else 0.0
    return StabilityReport(max_real, status, bool(det_sign > 0))


def check_stability(A, kappa) -> bool:
    """True iff all eigenvalues of A have real part below -1e-6 * kappa."""
    return stability_report(A, kappa).status == "stable"


def solve_lyapunov(A, Q, tol: float = 0.0) -> np.ndarray:
    """Solve A V + V A^T = -Q by Kronecker vectorization.

    (I kron A + A kron I) vec(V) = -vec(Q) with column-major vec, solved densely,
    followed by one step of iterative refinement and symmetrization.
    Refuses when max Re(lambda) >= -tol.
    """
    A = np.asarray(A, dtype=complex)
    Q = np.asarray(Q)
    d = A.shape[0]
    if A.shape != (d, d) or Q.shape != (d, d):
        raise ValidationError("A", f"shape mismatch: A {A.shape}, Q {Q.shape}")
    max_real = float(_eigvals(A).real.max())
    if max_real >= -tol:
        raise UnstableError(max_real)
    eye = np.eye(d)
    K = np.kron(eye, A) + np.kron(A, eye)
    rhs = -Q.reshape(-1, order="F").astype(complex)
    try:
        v = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"singular Lyapunov operator (cond={np.linalg.cond(K):.3e})") from exc
    v = v + np.linalg.solve(K, rhs - K @ v)
    if not np.all(np.isfinite(v)):
        raise SolverError(f"Lyapunov solve produced non-finite values (cond={np.linalg.cond(K):.3e})")
    V = v.reshape(d, d, order="F")
    return 0.5 * (V + V.T)


def lyapunov_residual(A, V, Q) -> float:
    """||A V + V A^T + Q||_F / ||Q||_F."""
    r = A @ V + V @ A.T + Q
    return float(np.linalg.norm(r) / np.linalg.norm(Q))


def phonon_numbers(V, n_modes: int) -> tuple:
    """n_j = V[b_j^+, b_j] - 1/2 for every mechanical mode."""
    out = []
    for j in range(n_modes):
        entry = V[n_modes + 2 + j, j + 1]
        if abs(entry.imag) > IMAG_ATOL:
            raise ResidualError(f"mode {j + 1} occupation has an imaginary part", abs(entry.imag))
        out.append(float(entry.real) - 0.5)
    return tuple(out)


def dark_mode_occupation(V, params: SystemParams):
    """Occupations of B_+- = (g_1 b_1 +- g_2 b_2) / sqrt(g_1^2 + g_2^2).

    The basis change is applied as a congruence on the mechanical rows and
    columns of V (the same real rotation acts on b and on b^+).
    Returns ``(n_bright, n_dark)``.
    """
    if params.n_modes != 2:
        raise ValidationError("n_modes", "bright/dark basis is defined for two mechanical modes")
    g1, g2 = params.optomech_couplings
    norm = np.hypot(g1, g2)
    if norm == 0:
        raise ValidationError("optomech_couplings", "g_1 = g_2 = 0 leaves the bright mode undefined")
    rot = np.array([[g1, g2], [g1, -g2]]) / norm
    T = np.eye(6)
    T[1:3, 1:3] = rot
    T[4:6, 4:6] = rot
    W = T @ V @ T.T
    n_bright = W[4, 1].real - 0.5
    n_dark = W[5, 2].real - 0.5
    return float(n_bright), float(n_dark)


def steady_covariance(A, Q, n_modes: int, kappa: float) -> CovarianceResult:
    """Stability check, Lyapunov solve and phonon extraction in one call."""
    report = stability_report(A, kappa)
    if report.status != "stable":
        raise UnstableError(report.max_real)
    V = solve_lyapunov(A, Q)
    res = lyapunov_residual(A, V, Q)
    if res > LYAP_RTOL:
        raise ResidualError("Lyapunov residual above tolerance", res)
    return CovarianceResult(V, res, phonon_numbers(V, n_modes), True)
