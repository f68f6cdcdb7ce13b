"""Parameter sweeps, threshold and optimum finders, CSV output."""
from __future__ import annotations

import csv
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .covariance import steady_covariance
from .errors import BracketError, SolverError, UnstableError, ValidationError
from .linearized import linearize
from .params import SystemParams
from .search import bisect, golden_minimize
from .steady import build_polynomial, find_steady_states, select_branch

_CK_RE = re.compile(r"^ck_(?:coupling|strength)_(\d+)$")

UNITS = {"power": "W", "detuning": "rad_s", "ck": "rad_s"}


def parse_variable(name: str):
    """Map a swept-variable name to ``(kind, mode)``; mode is 0-based or None."""
    if name in ("power", "detuning"):
        return name, None
    m = _CK_RE.match(name)
    if m:
        return "ck", int(m.group(1)) - 1
    raise ValidationError("parameter", f"unknown swept parameter {name!r}")


def apply_variable(params: SystemParams, name: str, value: float) -> SystemParams:
    kind, mode = parse_variable(name)
    if kind == "power":
        return params.with_power(value)
    if kind == "detuning":
        return params.with_detuning(value)
    if mode >= params.n_modes:
        raise ValidationError("parameter", f"{name} refers to mode {mode + 1} but N={params.n_modes}")
    return params.with_ck(mode, value)


def column_name(name: str) -> str:
    kind, mode = parse_variable(name)
    if kind == "ck":
        return f"ck_coupling_{mode + 1}_rad_s"
    return f"{kind}_{UNITS[kind]}"


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    count: int
    base: SystemParams
    spacing: str = "linear"
    branch: int = 1
    label: str = ""

    def __post_init__(self):
        parse_variable(self.parameter)
        if self.count < 2:
            raise ValidationError("count", "a sweep needs at least 2 points")
        if not self.start < self.stop:
            raise ValidationError("start", "sweep requires start < stop")
        if self.spacing not in ("linear", "log"):
            raise ValidationError("spacing", f"unknown spacing {self.spacing!r}")
        if self.spacing == "log" and self.start <= 0:
            raise ValidationError("start", "log spacing needs start > 0")
        if self.branch < 1:
            raise ValidationError("branch", "branch numbers start at 1")
        apply_variable(self.base, self.parameter, self.start)

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepRecord:
    value: float
    n_modes: int
    index: int = 0
    series: str = ""
    degree: int = 0
    roots: tuple = ()
    root_classes: tuple = ()
    n_branch_stable: int = 0
    x_branch: float = math.nan
    delta_eff: float = math.nan
    omega_eff: tuple = ()
    phonons: tuple = ()
    lyapunov_residual: float = math.nan
    status: str = "ok"
    message: str = field(default="", compare=False)


def _root_class(state) -> str:
    if state.stability == "stable":
        return "S"
    if state.stability == "marginal":
        return "M"
    return "T" if state.branch_stable else "U"


def evaluate_point(params: SystemParams, branch: int = 1, phonons: bool = True,
                   value: float = math.nan, index: int = 0, series: str = "") -> SweepRecord:
    """Run the chain polynomial -> roots -> stability -> branch -> Lyapunov.

    Never raises for numerical trouble; the outcome is carried in ``status``:
    ok, no-stable-state, marginal, unstable (chosen branch fails Routh-Hurwitz)
    or error.
    """
    base = dict(value=value, n_modes=params.n_modes, index=index, series=series)
    try:
        poly = build_polynomial(params)
        states = find_steady_states(params, poly)
    except SolverError as exc:
        return SweepRecord(**base, status="error", message=str(exc))
    base.update(degree=poly.degree, roots=tuple(s.photon_number for s in states),
                root_classes=tuple(_root_class(s) for s in states),
                n_branch_stable=sum(1 for s in states if s.branch_stable))
    chosen = select_branch(states, branch)
    if chosen is None:
        return SweepRecord(**base, status="no-stable-state")
    lin = linearize(params, chosen)
    base.update(x_branch=chosen.photon_number, delta_eff=lin.effective_detuning,
                omega_eff=lin.effective_frequencies)
    if chosen.stability == "marginal":
        return SweepRecord(**base, status="marginal")
    if not phonons:
        return SweepRecord(**base, status="ok" if chosen.stable else "unstable")
    try:
        cov = steady_covariance(lin.drift, lin.noise, params.n_modes, params.cavity_decay)
    except UnstableError as exc:
        return SweepRecord(**base, status="unstable", message=str(exc))
    except SolverError as exc:
        return SweepRecord(**base, status="error", message=str(exc))
    return SweepRecord(**base, phonons=cov.phonons, lyapunov_residual=cov.lyapunov_residual)


def run_sweep(spec: SweepSpec, phonons: bool = True, threads: int = 1) -> list[SweepRecord]:
    """Evaluate every grid point; records come back in grid order."""
    grid = spec.grid()

    def one(item):
        i, v = item
        return evaluate_point(apply_variable(spec.base, spec.parameter, float(v)), spec.branch,
                              phonons, value=float(v), index=i, series=spec.label)

    items = list(enumerate(grid))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, items))
    return [one(it) for it in items]


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return "%.17g" % v


def csv_header(parameter: str, n_modes: int) -> list[str]:
    return (["series", "index", column_name(parameter), "poly_degree", "n_roots", "n_branch_stable",
             "roots_x", "roots_class", "x_branch", "delta_eff_rad_s"]
            + [f"omega_eff_{j + 1}_rad_s" for j in range(n_modes)]
            + [f"n_f_{j + 1}" for j in range(n_modes)]
            + ["lyapunov_residual", "status"])


def csv_row(rec: SweepRecord) -> list[str]:
    n = rec.n_modes
    omega = list(rec.omega_eff) + [math.nan] * (n - len(rec.omega_eff))
    ph = list(rec.phonons) + [math.nan] * (n - len(rec.phonons))
    return ([rec.series, str(rec.index), _fmt(rec.value), str(rec.degree), str(len(rec.roots)),
             str(rec.n_branch_stable), ";".join(_fmt(x) for x in rec.roots), "".join(rec.root_classes),
             _fmt(rec.x_branch), _fmt(rec.delta_eff)]
            + [_fmt(v) for v in omega] + [_fmt(v) for v in ph]
            + [_fmt(rec.lyapunov_residual), rec.status])


def emit_csv(records: Sequence[SweepRecord], path, parameter: str) -> None:
    """Write records with a unit-bearing header; output is byte-deterministic."""
    if not records:
        raise ValidationError("records", "nothing to write")
    n = records[0].n_modes
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_header(parameter, n))
        for rec in records:
            if rec.n_modes != n:
                raise ValidationError("records", "mixed mode counts in one CSV")
            writer.writerow(csv_row(rec))


def final_occupation(params: SystemParams, mode: int, branch: int = 1) -> float:
    """n_f of ``mode`` (0-based) on the chosen branch; NaN when unavailable."""
    rec = evaluate_point(params, branch)
    if rec.status != "ok":
        return math.nan
    return rec.phonons[mode]


def _above_one(n):
    return math.isnan(n) or n > 1.0


def find_critical(params: SystemParams, mode: int, variable: str, bracket, branch: int = 1,
                  rtol: float = 1e-4, n_scan: int = 48) -> float:
    """First value, walking from ``bracket[0]`` to ``bracket[1]``, where n_f drops to 1.

    Power is scanned geometrically and bisected in log space; other variables
    linearly.  Points without a stable branch count as 'not cooled'.
    """
    start, end = map(float, bracket)
    kind, _ = parse_variable(variable)
    log_scale = kind == "power"
    if log_scale and (start <= 0 or end <= 0):
        raise ValidationError("bracket", "power bracket must be positive")

    def nf(v):
        return final_occupation(apply_variable(params, variable, v), mode, branch)

    if not _above_one(nf(start)):
        raise BracketError(f"n_f <= 1 already at bracket start {start:g}")
    grid = np.geomspace(start, end, n_scan) if log_scale else np.linspace(start, end, n_scan)
    prev = grid[0]
    for v in grid[1:]:
        if not _above_one(nf(v)):
            break
        prev = v
    else:
        raise BracketError(f"n_f stays above 1 on [{start:g}, {end:g}] for mode {mode + 1}")

    def sign(v):
        return 1.0 if _above_one(nf(v)) else -1.0

    if log_scale:
        u = bisect(lambda t: sign(math.exp(t)), math.log(prev), math.log(v),
                   lambda a, b: abs(b - a) <= rtol)
        return math.exp(u)
    return bisect(sign, prev, v, lambda a, b: abs(b - a) <= rtol * max(abs(a), abs(b)))


def find_critical_power(params, mode, bracket, branch=1, rtol=1e-4):
    return find_critical(params, mode, "power", bracket, branch, rtol)


def find_critical_ck(params, mode, bracket, ck_mode=0, branch=1, rtol=1e-4):
    """Critical CK strength of ``ck_mode`` for cooling ``mode`` (both 0-based).

    Walk from ``bracket[0]`` (not cooled, typically 0) towards ``bracket[1]``,
    which may be negative.
    """
    return find_critical(params, mode, f"ck_coupling_{ck_mode + 1}", bracket, branch, rtol)


class Optimum(NamedTuple):
    value: float
    n_min: float
    at_boundary: bool


def find_optimal(params: SystemParams, mode: int, variable: str, interval, branch: int = 1,
                 rtol: float = 1e-3, n_grid: int = 41) -> Optimum:
    """Coarse grid minimum of n_f refined by golden-section search.

    A grid minimum at either end is returned as-is with ``at_boundary`` set.
    """
    lo, hi = map(float, interval)
    kind, _ = parse_variable(variable)
    log_scale = kind == "power"
    grid = np.geomspace(lo, hi, n_grid) if log_scale else np.linspace(lo, hi, n_grid)

    def nf(v):
        n = final_occupation(apply_variable(params, variable, v), mode, branch)
        return math.inf if math.isnan(n) else n

    values = np.array([nf(v) for v in grid])
    if not np.any(np.isfinite(values)):
        raise BracketError(f"no stable branch anywhere on [{lo:g}, {hi:g}]")
    i = int(np.argmin(values))
    if i in (0, n_grid - 1):
        return Optimum(float(grid[i]), float(values[i]), True)
    a, b = grid[i - 1], grid[i + 1]
    if log_scale:
        t, n = golden_minimize(lambda t: nf(math.exp(t)), math.log(a), math.log(b), rtol)
        return Optimum(math.exp(t), n, False)
    x, n = golden_minimize(nf, a, b, rtol * max(abs(a), abs(b)))
    return Optimum(x, n, False)


def find_optimal_power(params, mode, interval, branch=1, rtol=1e-3):
    return find_optimal(params, mode, "power", interval, branch, rtol)
