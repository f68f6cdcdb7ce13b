"""Experiment configuration files (TOML syntax, ``.cfg`` extension).

A file holds a ``[params]`` table in the unit-tagged form accepted by
:func:`ckcool.params.normalize_params`, optional ``[[series]]`` entries that
override parameter keys, and optional ``[sweep]``, ``[critical]`` and
``[optimal]`` tables.  See README.md for the full schema.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ValidationError
from .params import POWER_UNITS, RATE_UNITS, SystemParams, normalize_params
from .sweep import SweepSpec, parse_variable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

COMMANDS = ("steady", "cool")


@dataclass
class RunConfig:
    name: str
    command: str
    description: str
    series: list = field(default_factory=list)     # [(label, SystemParams)]
    sweep: dict | None = None
    critical: dict | None = None
    optimal: dict | None = None

    def sweep_specs(self, branch: int | None = None) -> list[SweepSpec]:
        if self.sweep is None:
            raise ValidationError("sweep", f"config {self.name!r} has no [sweep] table")
        s = self.sweep
        for key in ("parameter", "start", "stop", "count"):
            if key not in s:
                raise ValidationError(f"sweep.{key}", "missing required field")
        specs = []
        for label, params in self.series:
            specs.append(SweepSpec(
                parameter=s["parameter"],
                start=to_si(s["parameter"], s["start"], s.get("unit"), params),
                stop=to_si(s["parameter"], s["stop"], s.get("unit"), params),
                count=int(s["count"]),
                base=params,
                spacing=s.get("spacing", "linear"),
                branch=int(branch if branch is not None else s.get("branch", 1)),
                label=label,
            ))
        return specs


def to_si(variable: str, value: float, unit: str | None, params: SystemParams) -> float:
    """Convert a sweep/bracket value to SI (W or rad/s).

    Detuning also accepts ``omega_1``: multiples of the first mechanical frequency.
    """
    kind, _ = parse_variable(variable)
    if kind == "power":
        table = POWER_UNITS
        unit = unit or "W"
    elif kind == "detuning" and unit == "omega_1":
        return float(value) * params.mech_frequencies[0]
    else:
        table = RATE_UNITS
        unit = unit or "rad_s"
    if unit not in table:
        raise ValidationError("unit", f"unit {unit!r} not valid for {variable}")
    return float(value) * table[unit]


def shipped_configs() -> list[str]:
    root = resources.files("ckcool") / "configs"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def resolve(path_or_name: str) -> Path:
    p = Path(path_or_name)
    if p.exists():
        return p
    name = path_or_name[:-4] if path_or_name.endswith(".cfg") else path_or_name
    shipped = resources.files("ckcool") / "configs" / f"{name}.cfg"
    if shipped.is_file():
        return Path(str(shipped))
    raise ValidationError("config", f"no such config file or shipped config: {path_or_name!r}")


def load_config(path_or_name: str) -> RunConfig:
    path = resolve(path_or_name)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError("config", f"{path}: {exc}") from None
    return parse_config(raw, name=path.stem)


def parse_config(raw: dict, name: str = "config") -> RunConfig:
    if "params" not in raw:
        raise ValidationError("params", "missing [params] table")
    command = raw.get("command", "cool")
    if command not in COMMANDS:
        raise ValidationError("command", f"expected one of {COMMANDS}")
    base = dict(raw["params"])
    series = []
    for i, entry in enumerate(raw.get("series", [])):
        entry = dict(entry)
        label = str(entry.pop("label", f"series{i + 1}"))
        merged = dict(base)
        merged.update(entry)
        series.append((label, normalize_params(merged)))
    if not series:
        series.append(("", normalize_params(base)))
    return RunConfig(name=name, command=command, description=raw.get("description", ""),
                     series=series, sweep=raw.get("sweep"), critical=raw.get("critical"),
                     optimal=raw.get("optimal"))
