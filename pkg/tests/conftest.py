import json
import math
from pathlib import Path

import pytest

from ckcool.params import normalize_params, device_defaults

FIXTURES = Path(__file__).parent / "fixtures" / "derived.json"
TWO_PI = 2 * math.pi
UW = 1e-6


@pytest.fixture(scope="session")
def derived():
    with open(FIXTURES) as fh:
        return json.load(fh)


def params_from(entry):
    return normalize_params(entry["params"])


@pytest.fixture
def two_mode():
    """Two degenerate modes, CK on mode 1, Delta = omega_m, P = 1e-3 uW."""
    return device_defaults(power=1e-3 * UW)


@pytest.fixture
def three_mode():
    return device_defaults(n_modes=3, ck=(0.25, 0.1, 0.0), power=4e-3 * UW,
                          laser_frequency=TWO_PI * 1.31e9)


def random_params(rng, n_modes=2, ck_modes=1):
    """Device with default structure with rates drawn log-uniformly over +-2 decades."""
    def f():
        return 10 ** rng.uniform(-2, 2)
    base = device_defaults(n_modes=n_modes, ck=(0.0,) * n_modes)
    ck = [0.25 * f() * rng.choice([-1, 1]) if j < ck_modes else 0.0 for j in range(n_modes)]
    return type(base)(
        detuning=base.detuning * rng.uniform(0.8, 1.2),
        mech_frequencies=base.mech_frequencies,
        mech_dampings=[g * f() for g in base.mech_dampings],
        optomech_couplings=[g * f() for g in base.optomech_couplings],
        ck_couplings=ck,
        cavity_decay=base.cavity_decay * f(),
        laser_frequency=base.laser_frequency,
        input_power=1e-9 * f(),
        bath_occupations=base.bath_occupations,
    )
