"""Mean-field steady states: photon-number polynomial, roots, branches.

The steady intracavity photon number x = |alpha|^2 solves

    x * (kappa^2 + Delta_eff(x)^2) = eps^2

where Delta_eff(x) is a rational function of x with one pole pair per
CK-coupled mode.  Clearing denominators with D(x) = prod_j (Omega_j(x)^2 +
gamma_j^2) gives the polynomial

    P(x) = x * (kappa^2 D^2 + B^2) - eps^2 D^2,   B = Delta_eff * D,

of degree 4m + 3 for m CK-coupled modes out of N, or 4m + 1 when m = N
(7 for the two-mode device with one CK coupling, 3 without CK).  D > 0 on the real axis, so the real roots of P
are exactly the physical steady states.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ResidualError, SolverError
from .params import SystemParams, drive_amplitude

log = logging.getLogger(__name__)

IMAG_TOL = 1e-7         # |Im z| <= IMAG_TOL * max(1, |z|) in scaled units => real root
ZERO_TOL = 1e-12        # scaled roots in [-ZERO_TOL, 0) are clamped to 0
STATE_RTOL = 1e-8


class ScaledModel(NamedTuple):
    """Rates in units of ``rate_scale``, photon number in units of ``x_ref``."""

    detuning: float
    omega: np.ndarray
    gamma: np.ndarray
    g_sq: np.ndarray
    g_ck: np.ndarray
    kappa_sq: float
    eps_sq: float


@dataclass(frozen=True)
class SteadyPolynomial:
    """Steady-state polynomial in the scaled variable s = x / x_ref.

    ``coefficients`` are ascending in s.  ``physical_coefficients`` returns the
    same polynomial in x with SI rates, i.e. P(x) exactly as written in the
    module docstring.
    """

    coefficients: np.ndarray
    x_ref: float
    rate_scale: float
    model: ScaledModel
    n_modes: int

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coefficients)
        return int(nz[-1]) if nz.size else -1

    def physical_coefficients(self) -> np.ndarray:
        k = np.arange(len(self.coefficients))
        factor = self.x_ref * self.rate_scale ** (4 * self.n_modes + 2)
        return self.coefficients * factor / self.x_ref ** k

    def evaluate(self, x):
        """P(x) from the expanded coefficients, in scaled units."""
        return npoly.polyval(np.asarray(x) / self.x_ref, self.coefficients)

    def relative_residual(self, x) -> float:
        """|P(x)| / max_k |c_k x^k| (dimensionless)."""
        s = x / self.x_ref
        terms = self.coefficients * s ** np.arange(len(self.coefficients))
        scale = np.max(np.abs(terms))
        return float(abs(terms.sum()) / scale) if scale > 0 else 0.0


@dataclass(frozen=True)
class SteadyState:
    photon_number: float
    alpha: complex
    betas: tuple
    effective_detuning: float
    stability: str | None = None        # 'stable' | 'marginal' | 'unstable' (Routh-Hurwitz)
    branch_stable: bool | None = None   # det(-A) > 0: positive slope of the S-curve
    max_real_eig: float | None = None
    branch_index: int = 0

    @property
    def stable(self) -> bool:
        return self.stability == "stable"


def _reference_scales(params: SystemParams, eps_sq: float):
    w = np.asarray(params.mech_frequencies)
    rate_scale = float(w.max())
    cands = [rate_scale / abs(gck) for gck in params.ck_couplings if gck != 0.0]
    cands += [rate_scale ** 2 / g ** 2 for g in params.optomech_couplings if g != 0.0]
    if cands:
        x_ref = min(cands)
    elif eps_sq > 0:
        x_ref = eps_sq / (params.cavity_decay ** 2 + params.detuning ** 2)
    else:
        x_ref = 1.0
    return rate_scale, x_ref


def _scaled_model(params: SystemParams, eps: float):
    eps_sq = eps * eps
    rs, x_ref = _reference_scales(params, eps_sq)
    model = ScaledModel(
        detuning=params.detuning / rs,
        omega=np.asarray(params.mech_frequencies) / rs,
        gamma=np.asarray(params.mech_dampings) / rs,
        g_sq=np.asarray(params.optomech_couplings) ** 2 * x_ref / rs ** 2,
        g_ck=np.asarray(params.ck_couplings) * x_ref / rs,
        kappa_sq=(params.cavity_decay / rs) ** 2,
        eps_sq=eps_sq / (x_ref * rs ** 2),
    )
    return model, x_ref, rs


def _assemble(m: ScaledModel) -> np.ndarray:
    n = len(m.omega)
    omegas = [np.array([m.omega[j], -m.g_ck[j]]) for j in range(n)]
    dens = [npoly.polyadd(npoly.polymul(om, om), [m.gamma[j] ** 2]) for j, om in enumerate(omegas)]
    d = np.array([1.0])
    for den in dens:
        d = npoly.polymul(d, den)
    b = m.detuning * d
    for j in range(n):
        others = np.array([1.0])
        for k in range(n):
            if k != j:
                others = npoly.polymul(others, dens[k])
        shift = npoly.polyadd(2.0 * m.g_sq[j] * npoly.polymul([0.0, 1.0], omegas[j]),
                              [0.0, 0.0, m.g_ck[j] * m.g_sq[j]])
        b = npoly.polysub(b, npoly.polymul(shift, others))
    d2 = npoly.polymul(d, d)
    lhs = npoly.polymul([0.0, 1.0], npoly.polyadd(m.kappa_sq * d2, npoly.polymul(b, b)))
    return npoly.polysub(lhs, m.eps_sq * d2)


def build_polynomial(params: SystemParams, eps: float | None = None) -> SteadyPolynomial:
    """Expand the steady-state polynomial by coefficient convolution."""
    if eps is None:
        eps = drive_amplitude(params)
    model, x_ref, rs = _scaled_model(params, eps)
    coeffs = _assemble(model)
    nz = np.flatnonzero(coeffs)
    coeffs = coeffs[: nz[-1] + 1] if nz.size else coeffs[:1] * 0.0
    return SteadyPolynomial(coeffs, x_ref, rs, model, params.n_modes)


def _factored(m: ScaledModel, z):
    """P(z), P'(z) evaluated from the unexpanded D and B factors."""
    z = np.asarray(z, dtype=complex)
    one, zero = np.ones_like(z), np.zeros_like(z)
    dens, ddens = [], []
    for j in range(len(m.omega)):
        om = m.omega[j] - m.g_ck[j] * z
        dens.append(om * om + m.gamma[j] ** 2)
        ddens.append(-2.0 * m.g_ck[j] * om)
    d, dd = one, zero
    for den, dden in zip(dens, ddens):
        d, dd = d * den, dd * den + d * dden
    b, db = m.detuning * d, m.detuning * dd
    for j in range(len(m.omega)):
        o, do = one, zero
        for k in range(len(m.omega)):
            if k != j:
                o, do = o * dens[k], do * dens[k] + o * ddens[k]
        om = m.omega[j] - m.g_ck[j] * z
        t = m.g_sq[j] * z * (2.0 * om + m.g_ck[j] * z)
        dt = 2.0 * m.g_sq[j] * om
        b, db = b - t * o, db - (dt * o + t * do)
    p = z * (m.kappa_sq * d * d + b * b) - m.eps_sq * d * d
    dp = (m.kappa_sq * d * d + b * b) + 2.0 * z * (m.kappa_sq * d * dd + b * db) - 2.0 * m.eps_sq * d * dd
    return p, dp


def _aberth(z, fn, maxiter=100, tol=1e-14):
    z = np.array(z, dtype=complex)
    n = len(z)
    for _ in range(maxiter):
        p, dp = fn(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            repulse = 1.0 / diff
            np.fill_diagonal(repulse, 0.0)
            step = newton / (1.0 - newton * repulse.sum(axis=1))
        step = np.where(np.isfinite(step), step, 0.0)
        z = z - step
        if np.all(np.abs(step) <= tol * np.abs(z)):
            return z, True
    return z, n == 0


def solve_roots(poly: SteadyPolynomial) -> list[float]:
    """Real nonnegative roots x (photons), ascending.

    Companion-matrix eigenvalues seed a simultaneous Newton (Aberth-Ehrlich)
    refinement that evaluates P from its factored form, which stays accurate
    near the CK poles where the expanded coefficients lose many digits.
    """
    c = poly.coefficients
    if not np.any(c):
        raise SolverError("degenerate steady-state polynomial (all coefficients zero)")
    if poly.degree < 1:
        return []
    lead_zeros = int(np.flatnonzero(c)[0])
    reduced = c[lead_zeros:]
    roots = [0.0] if lead_zeros else []
    if len(reduced) < 2:
        return roots

    z0 = np.linalg.eigvals(npoly.polycompanion(reduced)) if len(reduced) > 2 else np.array([-reduced[0] / reduced[1]])
    # asymmetric nudge: conjugate seeds must not stay conjugate or a close real pair is never split
    z0 = z0 * (1.0 + 1e-4 * np.exp(0.7j * np.pi * (np.arange(len(z0)) + 0.5) / len(z0)))

    def deflated(z):
        p, dp = _factored(poly.model, z)
        for _ in range(lead_zeros):
            p = p / z
            dp = (dp - p) / z
        return p, dp

    z, ok = _aberth(z0, deflated)
    if not ok:
        log.warning("Aberth refinement did not converge; falling back to companion roots")
        z = np.linalg.eigvals(npoly.polycompanion(reduced)) if len(reduced) > 2 else z0

    for zi in z:
        if abs(zi.imag) > IMAG_TOL * max(1.0, abs(zi)):
            continue
        s = zi.real
        p, dp = deflated(np.array([s]))
        if dp[0] != 0 and np.isfinite(p[0] / dp[0]):
            s = s - (p[0] / dp[0]).real
        if s < -ZERO_TOL:
            continue
        roots.append(max(s, 0.0))
    return sorted(r * poly.x_ref for r in roots)


def mechanical_amplitudes(params: SystemParams, x: float) -> np.ndarray:
    """beta_j = i g_j x / (i (omega_j - g_ck,j x) + gamma_j)."""
    w = np.asarray(params.mech_frequencies)
    gck = np.asarray(params.ck_couplings)
    return 1j * np.asarray(params.optomech_couplings) * x / (
        1j * (w - gck * x) + np.asarray(params.mech_dampings))


def steady_detuning(params: SystemParams, betas) -> float:
    betas = np.asarray(betas)
    g = np.asarray(params.optomech_couplings)
    gck = np.asarray(params.ck_couplings)
    return float(params.detuning - np.sum(2.0 * g * betas.real) - np.sum(gck * np.abs(betas) ** 2))


def steady_residuals(params: SystemParams, eps: float, state: SteadyState) -> np.ndarray:
    """Relative residuals of the cavity line and each mechanical line."""
    x = state.photon_number
    cav = (1j * state.effective_detuning + params.cavity_decay) * state.alpha - eps
    out = [abs(cav) / eps if eps > 0 else abs(cav)]
    for j, beta in enumerate(state.betas):
        w, gam = params.mech_frequencies[j], params.mech_dampings[j]
        rhs = 1j * params.optomech_couplings[j] * x
        lhs = (1j * (w - params.ck_couplings[j] * x) + gam) * beta
        out.append(abs(lhs - rhs) / abs(rhs) if rhs != 0 else abs(lhs))
    return np.array(out)


def reconstruct_state(params: SystemParams, eps: float, x: float, rtol: float = STATE_RTOL) -> SteadyState:
    """Full mean-field state (alpha, beta_j) for a root x of the polynomial."""
    betas = mechanical_amplitudes(params, x)
    delta = steady_detuning(params, betas)
    alpha = eps / complex(params.cavity_decay, delta)
    n_alpha = abs(alpha) ** 2
    if x == 0.0:
        mismatch = n_alpha
    else:
        mismatch = abs(n_alpha - x) / x
    if mismatch > rtol:
        raise ResidualError(f"x={x:.6e} is not a consistent steady state", mismatch)
    return SteadyState(photon_number=float(x), alpha=complex(alpha),
                       betas=tuple(complex(b) for b in betas), effective_detuning=delta)


def classify_branches(states: list[SteadyState]) -> list[SteadyState]:
    """Number the S-curve-stable states 1, 2, ... by ascending x; others get 0."""
    ordered = sorted(states, key=lambda s: s.photon_number)
    out, k = [], 0
    for s in ordered:
        if s.branch_stable:
            k += 1
            out.append(replace(s, branch_index=k))
        else:
            out.append(replace(s, branch_index=0))
    return out


def select_branch(states: list[SteadyState], k: int = 1) -> SteadyState | None:
    """State with ``branch_index == k`` or None when there is no such branch."""
    for s in states:
        if s.branch_index == k:
            return s
    return None


def find_steady_states(params: SystemParams, poly: SteadyPolynomial | None = None) -> list[SteadyState]:
    """All steady states with stability flags and branch numbers."""
    from .covariance import stability_report
    from .linearized import build_drift

    eps = drive_amplitude(params)
    if poly is None:
        poly = build_polynomial(params, eps)
    states = []
    for x in solve_roots(poly):
        st = reconstruct_state(params, eps, x)
        rep = stability_report(build_drift(params, st), params.cavity_decay)
        states.append(replace(st, stability=rep.status, branch_stable=rep.turning_point_stable,
                              max_real_eig=rep.max_real))
    return classify_branches(states)
