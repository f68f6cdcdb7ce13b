"""Physical parameters of one cavity mode coupled to N mechanical modes.

Everything is stored in SI units with rates as angular frequencies (rad/s).
Configuration maps carry an explicit unit tag on every dimensional field:
``rad_s`` for angular rates and ``hz`` for cycle frequencies (multiplied by
2*pi on ingestion).  Nothing is inferred.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Any, Mapping, Sequence

import numpy as np
from scipy import constants

from .errors import ValidationError

HBAR = constants.hbar
K_B = constants.k
TWO_PI = 2.0 * math.pi

RATE_UNITS = {"rad_s": 1.0, "hz": TWO_PI}
POWER_UNITS = {"W": 1.0, "mW": 1e-3, "uW": 1e-6, "nW": 1e-9}
TEMPERATURE_UNITS = {"K": 1.0, "mK": 1e-3}

# config key -> dataclass field
SCALAR_RATES = {
    "detuning": "detuning",
    "cavity_decay": "cavity_decay",
    "laser_frequency": "laser_frequency",
}
MODE_RATES = {
    "mech_frequency": "mech_frequencies",
    "mech_damping": "mech_dampings",
    "optomech_coupling": "optomech_couplings",
    "ck_coupling": "ck_couplings",
}


@dataclass(frozen=True)
class SystemParams:
    """Immutable parameter set; per-mode quantities are tuples of length N."""

    detuning: float
    mech_frequencies: tuple
    mech_dampings: tuple
    optomech_couplings: tuple
    ck_couplings: tuple
    cavity_decay: float
    laser_frequency: float
    input_power: float
    bath_occupations: tuple

    def __post_init__(self):
        for f in ("mech_frequencies", "mech_dampings", "optomech_couplings",
                  "ck_couplings", "bath_occupations"):
            value = getattr(self, f)
            if np.isscalar(value):
                raise ValidationError(f, "expected one value per mechanical mode")
            object.__setattr__(self, f, tuple(float(v) for v in value))
        for f in ("detuning", "cavity_decay", "laser_frequency", "input_power"):
            object.__setattr__(self, f, float(getattr(self, f)))
        _validate(self)

    @property
    def n_modes(self) -> int:
        return len(self.mech_frequencies)

    def with_power(self, power):
        return _replace(self, input_power=power)

    def with_detuning(self, detuning):
        return _replace(self, detuning=detuning)

    def with_ck(self, mode, value):
        """Copy with the CK coupling of mechanical mode ``mode`` (0-based) set."""
        ck = list(self.ck_couplings)
        ck[mode] = value
        return _replace(self, ck_couplings=tuple(ck))


def _replace(p, **changes):
    kw = {f.name: getattr(p, f.name) for f in fields(p)}
    kw.update(changes)
    return SystemParams(**kw)


def _validate(p: SystemParams):
    n = len(p.mech_frequencies)
    if n < 1:
        raise ValidationError("mech_frequencies", "at least one mechanical mode is required")
    for f in ("mech_dampings", "optomech_couplings", "ck_couplings", "bath_occupations"):
        if len(getattr(p, f)) != n:
            raise ValidationError(f, f"length {len(getattr(p, f))} does not match N={n}")
    for f in fields(p):
        vals = getattr(p, f.name)
        vals = vals if isinstance(vals, tuple) else (vals,)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError(f.name, "non-finite value")
    if p.cavity_decay <= 0:
        raise ValidationError("cavity_decay", "must be > 0")
    if p.laser_frequency <= 0:
        raise ValidationError("laser_frequency", "must be > 0")
    if p.input_power < 0:
        raise ValidationError("input_power", "must be >= 0")
    if any(w <= 0 for w in p.mech_frequencies):
        raise ValidationError("mech_frequencies", "must be > 0")
    if any(g <= 0 for g in p.mech_dampings):
        raise ValidationError("mech_dampings", "must be > 0")
    if any(n_th < 0 for n_th in p.bath_occupations):
        raise ValidationError("bath_occupations", "must be >= 0")


def bose_occupation(omega, temperature):
    """Thermal phonon number 1/(exp(hbar*omega/(k_B*T)) - 1).

    ``temperature == 0`` gives exactly 0.
    """
    omega = np.asarray(omega, dtype=float)
    if temperature < 0:
        raise ValidationError("temperature", "must be >= 0")
    if temperature == 0:
        return np.zeros_like(omega)
    ratio = HBAR * omega / (K_B * temperature)
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(ratio)


def drive_amplitude(params: SystemParams) -> float:
    """Drive rate epsilon = sqrt(2 kappa P / (hbar omega_L)) in rad/s."""
    return math.sqrt(2.0 * params.cavity_decay * params.input_power
                     / (HBAR * params.laser_frequency))


def _tagged(raw: Mapping, key: str, units: Mapping[str, float]):
    if key not in raw:
        raise ValidationError(key, "missing required field")
    entry = raw[key]
    if not isinstance(entry, Mapping) or "value" not in entry or "unit" not in entry:
        raise ValidationError(key, "expected {value = ..., unit = ...}")
    unit = entry["unit"]
    if unit not in units:
        raise ValidationError(key, f"unknown unit {unit!r}; allowed: {sorted(units)}")
    value = entry["value"]
    scale = units[unit]
    if isinstance(value, (list, tuple)):
        try:
            return tuple(float(v) * scale for v in value)
        except (TypeError, ValueError):
            raise ValidationError(key, "values must be numbers") from None
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(key, "value must be a number") from None
    return value * scale


def normalize_params(raw: Mapping[str, Any]) -> SystemParams:
    """Build validated :class:`SystemParams` from a unit-tagged parameter map.

    Per-mode fields must be lists of equal length. Bath occupations come from
    either ``bath_occupation`` (list, dimensionless) or ``temperature``
    (``{value, unit}`` with unit ``K`` or ``mK``), not both.
    """
    kw: dict = {}
    for key, name in SCALAR_RATES.items():
        kw[name] = _tagged(raw, key, RATE_UNITS)
        if isinstance(kw[name], tuple):
            raise ValidationError(key, "expected a scalar")
    for key, name in MODE_RATES.items():
        value = _tagged(raw, key, RATE_UNITS)
        if not isinstance(value, tuple):
            raise ValidationError(key, "expected a list with one entry per mode")
        kw[name] = value
    kw["input_power"] = _tagged(raw, "input_power", POWER_UNITS)

    n = len(kw["mech_frequencies"])
    for key, name in MODE_RATES.items():
        if len(kw[name]) != n:
            raise ValidationError(key, f"length {len(kw[name])} does not match N={n}")

    has_nth = "bath_occupation" in raw
    has_temp = "temperature" in raw
    if has_nth == has_temp:
        raise ValidationError("bath_occupation", "give exactly one of bath_occupation or temperature")
    if has_nth:
        nth = raw["bath_occupation"]
        if not isinstance(nth, (list, tuple)):
            raise ValidationError("bath_occupation", "expected a list with one entry per mode")
        kw["bath_occupations"] = tuple(float(v) for v in nth)
    else:
        temperature = _tagged(raw, "temperature", TEMPERATURE_UNITS)
        kw["bath_occupations"] = tuple(bose_occupation(kw["mech_frequencies"], temperature))
    return SystemParams(**kw)


def params_to_config(params: SystemParams) -> dict:
    """Inverse of :func:`normalize_params` using ``rad_s``/``W`` tags (lossless)."""
    raw: dict = {}
    for key, name in SCALAR_RATES.items():
        raw[key] = {"value": getattr(params, name), "unit": "rad_s"}
    for key, name in MODE_RATES.items():
        raw[key] = {"value": list(getattr(params, name)), "unit": "rad_s"}
    raw["input_power"] = {"value": params.input_power, "unit": "W"}
    raw["bath_occupation"] = list(params.bath_occupations)
    return raw


def device_defaults(n_modes: int = 2, ck: Sequence[float] = (0.25, 0.0), power: float = 1e-9,
                   laser_frequency: float = TWO_PI * 1.3e9, bath: float = 100.0,
                   detuning: float | None = None) -> SystemParams:
    """Two-mode reference device (omega_m = 2pi x 6.3 MHz etc.).

    Bare-printed rates (gamma = 40, g = 250, g_ck) are taken as rad/s.
    """
    wm = TWO_PI * 6.3e6
    ck = tuple(ck) + (0.0,) * (n_modes - len(ck))
    return SystemParams(
        detuning=wm if detuning is None else detuning,
        mech_frequencies=(wm,) * n_modes,
        mech_dampings=(40.0,) * n_modes,
        optomech_couplings=(250.0,) * n_modes,
        ck_couplings=ck[:n_modes],
        cavity_decay=TWO_PI * 0.1e6,
        laser_frequency=laser_frequency,
        input_power=power,
        bath_occupations=(bath,) * n_modes,
    )
