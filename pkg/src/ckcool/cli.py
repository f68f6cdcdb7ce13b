"""Command-line entry point: ``ckcool {steady,cool,critical,optimal} --config FILE``.

Exit codes: 0 success, 2 invalid input, 3 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

from . import __version__
from .config import load_config, shipped_configs, to_si
from .errors import SolverError, ValidationError
from .sweep import column_name, emit_csv, find_critical, find_optimal, parse_variable, run_sweep

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER = 0, 2, 3


def _sweep(args, phonons: bool) -> int:
    cfg = load_config(args.config)
    specs = cfg.sweep_specs(branch=args.branch)
    records = []
    t0 = time.perf_counter()
    for spec in specs:
        records.extend(run_sweep(spec, phonons=phonons, threads=args.threads))
    if args.out:
        emit_csv(records, args.out, specs[0].parameter)
    else:
        _stdout_csv(records, specs[0].parameter)
    bad = sum(r.status == "error" for r in records)
    print(f"{cfg.name}: {len(records)} points in {time.perf_counter() - t0:.2f} s"
          f" ({sum(r.status == 'ok' for r in records)} ok, {bad} errors)", file=sys.stderr)
    return EXIT_SOLVER if bad == len(records) else EXIT_OK


def _stdout_csv(records, parameter):
    from .sweep import csv_header, csv_row
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(csv_header(parameter, records[0].n_modes))
    for rec in records:
        writer.writerow(csv_row(rec))


def _modes(table: dict, n_modes: int) -> list[int]:
    modes = table.get("modes", list(range(1, n_modes + 1)))
    for m in modes:
        if not 1 <= m <= n_modes:
            raise ValidationError("modes", f"mode {m} outside 1..{n_modes}")
    return [m - 1 for m in modes]


def _finder(args, kind: str) -> int:
    cfg = load_config(args.config)
    table = cfg.critical if kind == "critical" else cfg.optimal
    if table is None:
        raise ValidationError(kind, f"config {cfg.name!r} has no [{kind}] table")
    variable = table.get("variable", "power")
    parse_variable(variable)
    limits = table.get("bracket" if kind == "critical" else "range")
    if limits and all(isinstance(v, (int, float)) for v in limits):
        limits = [limits]
    if not limits or any(len(pair) != 2 for pair in limits):
        raise ValidationError(kind, "needs a two-element bracket/range (or a list of them)")
    branch = args.branch if args.branch is not None else int(table.get("branch", 1))
    rows, n_ok = [], 0
    for label, params in cfg.series:
        modes = [args.mode - 1] if args.mode else _modes(table, params.n_modes)
        for pair, mode in ((p, m) for p in limits for m in modes):
            lo, hi = (to_si(variable, v, table.get("unit"), params) for v in pair)
            row = {"series": label, "mode": mode + 1, "variable": column_name(variable),
                   "bracket_lo": lo, "bracket_hi": hi}
            try:
                if kind == "critical":
                    row["value"] = find_critical(params, mode, variable, (lo, hi), branch)
                else:
                    opt = find_optimal(params, mode, variable, (lo, hi), branch)
                    row.update(value=opt.value, n_f_min=opt.n_min, at_boundary=int(opt.at_boundary))
                row["status"] = "ok"
                n_ok += 1
            except SolverError as exc:
                row["status"] = "no-crossing" if kind == "critical" else "failed"
                row["message"] = str(exc)
            rows.append(row)
    fields = ["series", "mode", "variable", "bracket_lo", "bracket_hi", "value"]
    fields += ["n_f_min", "at_boundary"] if kind == "optimal" else []
    fields += ["status", "message"]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(fh, fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("%.17g" % v if isinstance(v, float) and not math.isnan(v) else v)
                             for k, v in row.items()})
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK if n_ok else EXIT_SOLVER


def _oracle(args) -> int:
    from .oracle import mint_fixtures
    data = mint_fixtures()
    text = json.dumps(data, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ckcool", description="Steady states and ground-state cooling "
                                     "of multimode optomechanical systems with cross-Kerr coupling.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--list-configs", action="store_true", help="print shipped config names and exit")
    sub = parser.add_subparsers(dest="command", metavar="{steady,cool,critical,optimal}")
    helps = {"steady": "photon-number sweep (roots, stability, branches)",
             "cool": "phonon-number sweep on the selected branch",
             "critical": "parameter value where n_f first drops to 1",
             "optimal": "parameter value minimizing n_f"}
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="config file or shipped name (e.g. fig3a)")
        p.add_argument("--out", help="output CSV (default stdout)")
        p.add_argument("--branch", type=int, default=None, help="stable branch index, 1 = lowest (default 1)")
        p.add_argument("--threads", type=int, default=1)
        if name in ("critical", "optimal"):
            p.add_argument("--mode", type=int, default=None, help="1-based mode (default: config or all)")
    p = sub.add_parser("oracle")   # hidden: mints the frozen fixture file
    p.add_argument("--out")
    sub._choices_actions = [a for a in sub._choices_actions if a.dest != "oracle"]
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_configs:
        print("\n".join(shipped_configs()))
        return EXIT_OK
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_VALIDATION
    try:
        if getattr(args, "branch", None) is not None and args.branch < 1:
            raise ValidationError("branch", "branch numbers start at 1")
        if getattr(args, "threads", 1) < 1:
            raise ValidationError("threads", "need at least one thread")
        if args.command in ("steady", "cool"):
            return _sweep(args, phonons=args.command == "cool")
        if args.command in ("critical", "optimal"):
            return _finder(args, args.command)
        return _oracle(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
