"""Linearized fluctuation dynamics around a mean-field steady state.

Fluctuations are ordered u = [da, db_1..db_N, da^+, db_1^+..db_N^+] and obey
du/dt = A u + noise.  A has the block form [[M, L], [conj(L), conj(M)]],
so only the upper blocks are built and the lower ones are copied as conjugates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .params import SystemParams
from .steady import SteadyState


@dataclass(frozen=True)
class LinearizedSystem:
    effective_detuning: float
    effective_frequencies: tuple
    drift: np.ndarray
    noise: np.ndarray


def effective_params(params: SystemParams, state: SteadyState):
    """Effective detuning and effective mechanical frequencies.

    Delta' = Delta - sum_j 2 g_j Re(beta_j) - sum_j g_ck,j |beta_j|^2 and
    Omega_j = omega_j - g_ck,j |alpha|^2 (equal to omega_j without CK).
    """
    betas = np.asarray(state.betas)
    g = np.asarray(params.optomech_couplings)
    gck = np.asarray(params.ck_couplings)
    delta = params.detuning - np.sum(2.0 * g * betas.real) - np.sum(gck * np.abs(betas) ** 2)
    n_photon = abs(state.alpha) ** 2
    omegas = tuple(float(w - k * n_photon) for w, k in zip(params.mech_frequencies, gck))
    return float(delta), omegas


def build_drift(params: SystemParams, state: SteadyState) -> np.ndarray:
    n = params.n_modes
    if len(state.betas) != n:
        raise ValidationError("betas", f"state has {len(state.betas)} modes, params have {n}")
    delta, omegas = effective_params(params, state)
    alpha = state.alpha
    alpha_c = alpha.conjugate()
    upper = np.zeros((n + 1, n + 1), dtype=complex)   # couples u to (da, db_j)
    cross = np.zeros((n + 1, n + 1), dtype=complex)   # couples u to (da^+, db_j^+)
    upper[0, 0] = complex(-params.cavity_decay, -delta)
    for j in range(n):
        g, gck, beta = params.optomech_couplings[j], params.ck_couplings[j], state.betas[j]
        k = j + 1
        upper[0, k] = 1j * g * alpha + 1j * gck * alpha * beta.conjugate()
        cross[0, k] = 1j * g * alpha + 1j * gck * alpha * beta
        upper[k, 0] = 1j * g * alpha_c + 1j * gck * alpha_c * beta
        cross[k, 0] = 1j * g * alpha + 1j * gck * alpha * beta
        upper[k, k] = complex(-params.mech_dampings[j], -omegas[j])
    return np.block([[upper, cross], [cross.conj(), upper.conj()]])


def build_noise(params: SystemParams) -> np.ndarray:
    """Symmetrized input-noise correlation matrix Q = (C + C^T) / 2.

    Vacuum optical input and thermal mechanical baths give nonzero entries
    only between each operator and its own adjoint.
    """
    n = params.n_modes
    dim = 2 * (n + 1)
    q = np.zeros((dim, dim))
    q[0, n + 1] = q[n + 1, 0] = params.cavity_decay
    for j in range(n):
        value = params.mech_dampings[j] * (2.0 * params.bath_occupations[j] + 1.0)
        q[j + 1, n + 2 + j] = q[n + 2 + j, j + 1] = value
    return q


def linearize(params: SystemParams, state: SteadyState) -> LinearizedSystem:
    delta, omegas = effective_params(params, state)
    return LinearizedSystem(delta, omegas, build_drift(params, state), build_noise(params))
