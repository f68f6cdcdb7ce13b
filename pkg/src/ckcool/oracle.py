"""Slow, independent cross-checks for the main solvers.

Nothing here calls into steady/linearized/covariance; the oracles work from
``SystemParams`` alone:

* dense_scan_roots: sign scan of the photon-number equation written in terms
  of the mechanical amplitudes (no polynomial expansion), then bisection.
* langevin_drift: Jacobian of the nonlinear Langevin equations taken
  symbolically by sympy.
* exact_polynomial: the steady-state numerator expanded in exact rationals.
* integrate_covariance: fixed-step RK4 for dV/dt = A V + V A^T + Q.
"""
from __future__ import annotations

import math
import warnings
from functools import lru_cache
from typing import NamedTuple

import mpmath
import numpy as np
import sympy as sp
from scipy import constants

from .errors import SolverError, ValidationError
from .params import SystemParams


class RangeWarning(RuntimeWarning):
    """The scan window probably ends before the largest root."""


class OracleReport(NamedTuple):
    quantity: str
    main: float
    oracle: float
    deviation: float
    passed: bool

    @classmethod
    def compare(cls, quantity, main, oracle, tol, scale=None):
        scale = abs(oracle) if scale is None else scale
        dev = abs(main - oracle) / scale if scale > 0 else abs(main - oracle)
        return cls(quantity, float(main), float(oracle), float(dev), bool(dev <= tol))

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.quantity}: main={self.main:.12g} oracle={self.oracle:.12g} dev={self.deviation:.2e}"


# ---------------------------------------------------------------- drive

def drive_amplitude_mp(params: SystemParams, dps: int = 40) -> float:
    """sqrt(2 kappa P / (hbar omega_L)) in 40-digit arithmetic."""
    with mpmath.workdps(dps):
        hbar = mpmath.mpf(constants.h) / (2 * mpmath.pi)
        val = mpmath.sqrt(2 * mpmath.mpf(params.cavity_decay) * mpmath.mpf(params.input_power)
                          / (hbar * mpmath.mpf(params.laser_frequency)))
        return float(val)


# ---------------------------------------------------------------- roots

def photon_equation(params: SystemParams, eps: float, x):
    """x (kappa^2 + Delta'(x)^2) - eps^2, with Delta' assembled from beta_j(x)."""
    x = np.asarray(x, dtype=float)
    delta = np.full_like(x, params.detuning)
    for w, gam, g, k in zip(params.mech_frequencies, params.mech_dampings,
                            params.optomech_couplings, params.ck_couplings):
        beta = 1j * g * x / (gam + 1j * (w - k * x))
        delta = delta - 2.0 * g * beta.real - k * (beta.real ** 2 + beta.imag ** 2)
    return x * (params.cavity_decay ** 2 + delta ** 2) - eps * eps


def dense_scan_roots(params: SystemParams, eps: float, x_max: float | None = None,
                     n_points: int = 10_000_000, rtol: float = 1e-12, chunk: int = 1_000_000):
    """Nonnegative roots of the photon-number equation as ``(lo, hi)`` brackets.

    The grid is geometric from ``x_max * 1e-14`` to ``x_max`` (default
    ``1.01 eps^2 / kappa^2``) with x = 0 prepended.  Each sign change is
    bisected until ``hi - lo <= rtol * hi``.
    """
    if n_points < 1_000_000:
        raise ValidationError("n_points", "dense scan needs at least 1e6 points")
    if eps == 0:
        return [(0.0, 0.0)]
    if x_max is None:
        x_max = 1.01 * eps * eps / params.cavity_decay ** 2
    grid = np.concatenate([[0.0], np.geomspace(x_max * 1e-14, x_max, n_points)])
    signs = np.empty(grid.size, dtype=np.int8)
    for s in range(0, grid.size, chunk):
        signs[s:s + chunk] = np.sign(photon_equation(params, eps, grid[s:s + chunk]))
    if signs[-1] < 0:
        warnings.warn(f"equation still negative at x_max={x_max:g}; roots may lie beyond",
                      RangeWarning, stacklevel=2)
    exact = np.flatnonzero(signs == 0)
    nz = np.flatnonzero(signs != 0)
    flips = nz[:-1][signs[nz[:-1]] != signs[nz[1:]]]
    nxt = nz[1:][signs[nz[:-1]] != signs[nz[1:]]]
    # brackets containing an exact zero are already reported via ``exact``
    keep = np.array([not np.any((exact > a) & (exact < b)) for a, b in zip(flips, nxt)], dtype=bool)
    lo, hi = grid[flips[keep]].copy(), grid[nxt[keep]].copy()
    s_lo = signs[flips[keep]].astype(float)
    for _ in range(200):
        open_ = hi - lo > rtol * hi
        if not open_.any():
            break
        mid = 0.5 * (lo + hi)
        f = np.sign(photon_equation(params, eps, mid))
        left = (f == s_lo) & open_
        right = (f != s_lo) & open_
        lo = np.where(left, mid, lo)
        hi = np.where(right, mid, hi)
    out = [(float(grid[i]), float(grid[i])) for i in exact]
    out += list(zip(lo.tolist(), hi.tolist()))
    return sorted(out)


# ---------------------------------------------------------------- polynomial

def exact_polynomial(params: SystemParams, eps: float) -> list:
    """Numerator of x(kappa^2 + Delta'^2) - eps^2 over prod_j |gamma_j + i Omega_j|^4.

    Every float input is converted to the exact rational it represents.
    Returns sympy Rationals, highest degree first.
    """
    x = sp.Symbol("x")
    R = sp.Rational
    delta = R(params.detuning)
    denom = sp.Integer(1)
    for w, gam, g, k in zip(params.mech_frequencies, params.mech_dampings,
                            params.optomech_couplings, params.ck_couplings):
        om = R(w) - R(k) * x
        den = om ** 2 + R(gam) ** 2
        re_beta = R(g) * x * om / den
        abs_beta_sq = R(g) ** 2 * x ** 2 / den
        delta = delta - 2 * R(g) * re_beta - R(k) * abs_beta_sq
        denom = denom * den ** 2
    expr = x * (R(params.cavity_decay) ** 2 + delta ** 2) - R(eps) ** 2
    numer = sp.cancel(sp.together(expr) * denom)
    return sp.Poly(sp.expand(numer), x).all_coeffs()


def normalized_coefficients(coeffs_high_first, x_scale: float) -> np.ndarray:
    """Coefficients of p(x_scale * y) in y, lowest degree first, scaled to max |c| = 1."""
    n = len(coeffs_high_first) - 1
    vals = [sp.Rational(c) * sp.Rational(x_scale) ** (n - i) for i, c in enumerate(coeffs_high_first)]
    top = max(abs(v) for v in vals)
    return np.array([float(v / top) for v in reversed(vals)])


# ---------------------------------------------------------------- drift

@lru_cache(maxsize=8)
def _symbolic_jacobian(n_modes: int):
    a, ad = sp.symbols("a ad")
    b = sp.symbols(f"b0:{n_modes}")
    bd = sp.symbols(f"bd0:{n_modes}")
    kap, dlt, eps = sp.symbols("kappa Delta epsilon", real=True)
    w = sp.symbols(f"w0:{n_modes}", real=True)
    gam = sp.symbols(f"gam0:{n_modes}", real=True)
    g = sp.symbols(f"g0:{n_modes}", real=True)
    k = sp.symbols(f"k0:{n_modes}", real=True)
    # H = Delta a^+a + sum w b^+b - sum g a^+a (b + b^+) - sum k a^+a b^+b + i eps (a^+ - a)
    da = -(kap + sp.I * dlt) * a + eps + sp.I * a * sum(g[j] * (b[j] + bd[j]) + k[j] * bd[j] * b[j]
                                                      for j in range(n_modes))
    db = [-(gam[j] + sp.I * w[j]) * b[j] + sp.I * g[j] * ad * a + sp.I * k[j] * ad * a * b[j]
          for j in range(n_modes)]
    # the adjoint equations follow by conjugating coefficients and swapping op <-> op^+
    swap = {a: ad, ad: a, **{b[j]: bd[j] for j in range(n_modes)}, **{bd[j]: b[j] for j in range(n_modes)}}

    def adjoint(e):
        return sp.conjugate(e).subs({sp.conjugate(s): s for s in (a, ad, *b, *bd)}).xreplace(swap)

    rhs = [da, *db, adjoint(da), *[adjoint(e) for e in db]]
    ops = [a, *b, ad, *bd]
    jac = sp.Matrix(rhs).jacobian(ops)
    args = (ops, kap, dlt, eps, w, gam, g, k)
    return sp.lambdify(args, jac, "numpy")


def langevin_drift(params: SystemParams, eps: float, x: float) -> np.ndarray:
    """Drift matrix at the mean-field point with photon number ``x``.

    alpha and beta_j are solved in closed form from the Langevin equations
    (alpha taken with the phase fixed by the real drive eps).
    """
    n = params.n_modes
    betas = [1j * g * x / (gam + 1j * (w - k * x)) for w, gam, g, k in
             zip(params.mech_frequencies, params.mech_dampings, params.optomech_couplings,
                 params.ck_couplings)]
    shift = sum(2 * g * bt.real + k * abs(bt) ** 2
                for g, k, bt in zip(params.optomech_couplings, params.ck_couplings, betas))
    alpha = eps / (params.cavity_decay + 1j * (params.detuning - shift))
    fn = _symbolic_jacobian(n)
    ops = [alpha, *betas, np.conj(alpha), *np.conj(betas)]
    jac = fn(ops, params.cavity_decay, params.detuning, eps, list(params.mech_frequencies),
             list(params.mech_dampings), list(params.optomech_couplings), list(params.ck_couplings))
    return np.array(jac, dtype=complex)


def langevin_noise(params: SystemParams) -> np.ndarray:
    """Symmetrized input-noise correlations, element by element."""
    n = params.n_modes
    d = 2 * n + 2
    Q = np.zeros((d, d))
    # <a_in a_in^+> = 1 with sqrt(2 kappa) input -> 2 kappa, halved by symmetrization
    Q[0, n + 1] = Q[n + 1, 0] = params.cavity_decay
    for j in range(n):
        Q[1 + j, n + 2 + j] = Q[n + 2 + j, 1 + j] = (
            params.mech_dampings[j] * (2 * params.bath_occupations[j] + 1))
    return Q


# ---------------------------------------------------------------- covariance

def default_integration(A) -> tuple[float, float]:
    """(t_end, dt): 20 slowest decay times, half the RK4-safe step of the fastest mode."""
    lam = np.linalg.eigvals(np.asarray(A, dtype=complex))
    slow = abs(lam.real.max())
    if not lam.real.max() < 0:
        raise ValidationError("A", "integration oracle needs a stable drift matrix")
    return 20.0 / slow, 0.5 / (2.0 * np.abs(lam).max())


def integrate_covariance(A, Q, t_end: float, dt: float) -> np.ndarray:
    """V(t_end) from V(0) = 0 under dV/dt = A V + V A^T + Q by classical RK4.

    One RK4 step is an affine map V -> L V + c.  The map is tabulated once on
    the matrix basis in extended precision and the n-fold step is composed by
    repeated squaring, which is the same iterate as stepping n times.
    """
    A = np.asarray(A, dtype=np.clongdouble)
    Q = np.asarray(Q, dtype=np.clongdouble)
    d = A.shape[0]
    n_steps = max(1, int(math.ceil(t_end / dt)))
    h = np.longdouble(t_end) / n_steps
    At = A.T

    def rk4(V):
        f = lambda M: A @ M + M @ At + Q
        k1 = f(V)
        k2 = f(V + h / 2 * k1)
        k3 = f(V + h / 2 * k2)
        k4 = f(V + h * k3)
        return V + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    c = rk4(np.zeros((d, d), dtype=np.clongdouble))
    L = np.empty((d * d, d * d), dtype=np.clongdouble)
    for col in range(d * d):
        E = np.zeros(d * d, dtype=np.clongdouble)
        E[col] = 1
        L[:, col] = (rk4(E.reshape(d, d)) - c).reshape(-1)
    radius = np.abs(np.linalg.eigvals(L.astype(complex))).max()
    if radius >= 1.0:
        raise SolverError(f"RK4 step dt={float(h):.3e} is unstable (spectral radius {radius:.6f})")

    # (L, c)^n by binary powers; composing (L2, c2) after (L1, c1) gives (L2 L1, L2 c1 + c2)
    acc_L = None
    acc_c = np.zeros(d * d, dtype=np.clongdouble)
    pow_L, pow_c = L, c.reshape(-1)
    n = n_steps
    while n:
        if n & 1:
            if acc_L is None:
                acc_L, acc_c = pow_L.copy(), pow_c.copy()
            else:
                acc_L, acc_c = pow_L @ acc_L, pow_L @ acc_c + pow_c
        n >>= 1
        if n:
            pow_L, pow_c = pow_L @ pow_L, pow_L @ pow_c + pow_c
    V = acc_c.reshape(d, d)
    V = 0.5 * (V + V.T)
    return V.astype(complex)


def phonons_from_covariance(V, n_modes: int) -> tuple:
    return tuple(float(V[n_modes + 2 + j, 1 + j].real) - 0.5 for j in range(n_modes))


def first_crossing(values, grid, level: float = 1.0):
    """Grid interval where ``values`` first goes from above ``level`` to at/below it.

    NaN counts as above.  Returns ``(grid[i-1], grid[i])`` or None.
    """
    above = [not (v <= level) for v in values]
    for i in range(1, len(grid)):
        if above[i - 1] and not above[i]:
            return float(grid[i - 1]), float(grid[i])
    return None


# ---------------------------------------------------------------- fixtures

def oracle_branch_one(params: SystemParams, eps: float):
    """Smallest dense-scan root whose Langevin drift is Hurwitz; (x, A) or None."""
    for lo, hi in dense_scan_roots(params, eps):
        x = 0.5 * (lo + hi)
        A = langevin_drift(params, eps, x)
        if np.linalg.eigvals(A).real.max() < 0:
            return x, A
    return None


def _covariance_fixture(params: SystemParams) -> dict:
    eps = drive_amplitude_mp(params)
    found = oracle_branch_one(params, eps)
    if found is None:
        raise SolverError("no stable root for covariance fixture")
    x, A = found
    t_end, dt = default_integration(A)
    V = integrate_covariance(A, langevin_noise(params), t_end, dt)
    return {"x": x, "t_end": t_end, "dt": dt, "V_real": V.real.tolist(), "V_imag": V.imag.tolist(),
            "phonons": list(phonons_from_covariance(V, params.n_modes))}


def mint_fixtures() -> dict:
    """Every frozen oracle value the test-suite compares against.

    The critical-power entry brackets the first n_f = 1 crossing on a dense
    power grid; it checks the bisection search, so it does use the main
    point chain for n_f.
    """
    from .params import device_defaults, params_to_config
    from .sweep import final_occupation

    out: dict = {"n_scan": 10_000_000}
    multi = device_defaults(power=1e-9)
    eps = drive_amplitude_mp(multi)
    out["fig2_multistable"] = {"params": params_to_config(multi), "eps": eps,
                               "brackets": [list(b) for b in dense_scan_roots(multi, eps)]}

    polys = {}
    for name, p in (("two_mode_single_ck", multi),
                    ("two_mode_no_ck", device_defaults(ck=(0.0, 0.0), power=1e-9)),
                    ("three_mode_two_ck", device_defaults(n_modes=3, ck=(0.25, 0.1, 0.0), power=4e-9,
                                                         laser_frequency=2 * math.pi * 1.31e9))):
        e = drive_amplitude_mp(p)
        scale = e * e / p.cavity_decay ** 2
        polys[name] = {"params": params_to_config(p), "x_scale": scale,
                       "coefficients": normalized_coefficients(exact_polynomial(p, e), scale).tolist()}
    out["polynomials"] = polys

    out["fig3a_covariance"] = {"params": params_to_config(device_defaults(power=1e-9)),
                               **_covariance_fixture(device_defaults(power=1e-9))}
    fig4 = device_defaults(n_modes=3, ck=(0.25, 0.1, 0.0), power=4e-9, laser_frequency=2 * math.pi * 1.31e9)
    out["fig4b_covariance"] = {"params": params_to_config(fig4), **_covariance_fixture(fig4)}

    grid = np.geomspace(1e-11, 1e-9, 401)
    crit = {}
    base = device_defaults()
    for mode in range(2):
        values = [final_occupation(base.with_power(float(P)), mode) for P in grid]
        crit[f"mode{mode + 1}"] = first_crossing(values, grid)
    out["critical_power_dense_grid"] = {"params": params_to_config(base), "grid": [1e-11, 1e-9, 401],
                                        "intervals": crit}
    return out
