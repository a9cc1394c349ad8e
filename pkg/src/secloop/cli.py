"""Command-line harness.

Subcommands: ``solve`` one scenario, ``sweep`` a parameter study to CSV,
``montecarlo`` a randomized study to CSV, ``verify`` the solver against the
brute-force grid. Exit codes: 0 success, 1 argument or file-format error,
2 solver failure, 3 verification gap above tolerance.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .dispatch import solve
from .errors import SecloopError
from .experiments import (
    ResultRow,
    csi_to_csv,
    load_montecarlo_spec,
    load_sweep_spec,
    multi_eve_to_csv,
    rows_to_csv,
    run_csi_mc,
    run_multi_eve,
    run_sweep,
    sample_scenario,
)
from .oracle import GridSpec, default_bandwidth_grid, default_power_grid, grid_search_p2
from .scenario import load_scenario

OUT_DIR_ENV = "SECLOOP_OUT_DIR"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3


def _resolve_out(path: str | None) -> str | None:
    if path is None:
        return None
    if os.path.isabs(path):
        return path
    base = os.environ.get(OUT_DIR_ENV)
    return os.path.join(base, path) if base else path


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        resolved = _resolve_out(out_path)
        os.makedirs(os.path.dirname(resolved) or ".", exist_ok=True)
        with open(resolved, "w", encoding="utf-8") as fh:
            fh.write(text)


def _report_payload(report) -> dict:
    return {
        "case": report.case.label,
        "uplink_superior": report.case.uplink_superior,
        "downlink_superior": report.case.downlink_superior,
        "objective": report.objective,
        "iterations": report.iterations,
        "solver_tolerance": report.solver_tolerance,
        "allocation": dataclasses.asdict(report.allocation),
        "metrics": dataclasses.asdict(report.metrics),
    }


def _cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    report = solve(scenario)
    if args.format == "json":
        text = json.dumps(_report_payload(report), indent=2, sort_keys=True) + "\n"
    else:
        # single-solve CSV reuses the sweep schema with d_th in the swept slot
        a, m = report.allocation, report.metrics
        row = ResultRow(
            scenario.policy.d_th, "proposed", m.cne, m.leakage_weighted,
            report.case.label, a.p_u, a.b_u, a.t_u, a.p_d, a.b_d, a.t_d, m.t_compute,
            report.objective,
        )
        text = rows_to_csv([row])
    _emit(text, args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = load_sweep_spec(args.spec)
    rows = run_sweep(spec)
    if args.format == "json":
        text = json.dumps([dataclasses.asdict(r) for r in rows], indent=2) + "\n"
    else:
        text = rows_to_csv(rows)
    _emit(text, args.out)
    return EXIT_OK


def _cmd_montecarlo(args) -> int:
    spec = load_montecarlo_spec(args.spec, seed_override=args.seed)
    if spec.kind == "eve_placement":
        results = run_multi_eve(spec)
        text = (
            json.dumps([dataclasses.asdict(r) for r in results], indent=2) + "\n"
            if args.format == "json"
            else multi_eve_to_csv(results)
        )
    else:
        results = run_csi_mc(spec)
        text = (
            json.dumps([dataclasses.asdict(r) for r in results], indent=2) + "\n"
            if args.format == "json"
            else csi_to_csv(results)
        )
    _emit(text, args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    base = load_scenario(args.scenario)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    failed = False
    for index in range(args.count):
        scenario = base if args.count == 1 else sample_scenario(rng, base=base)
        report = solve(scenario)
        limits = scenario.limits
        gains = scenario.gains()
        grids = []
        for superior, p_max in (
            (gains.g_u > gains.g_se, limits.p_umax),
            (gains.g_d > gains.g_ce, limits.p_dmax),
        ):
            if superior:
                grids.append(default_power_grid(p_max, args.points, decades=7.0))
            else:
                grids.append(default_bandwidth_grid(limits.b_max, args.points))
        oracle = grid_search_p2(scenario, grids[0], grids[1])
        gap = (oracle.objective - report.objective) / oracle.objective
        allowance = (oracle.resolution_bound + args.tol * oracle.objective) / oracle.objective
        ok = -1e-9 <= gap <= allowance
        worst = max(worst, abs(gap))
        print(
            f"scenario {index}: case {report.case.label} solver {report.objective:.9g} "
            f"oracle {oracle.objective:.9g} gap {gap:.3e} "
            f"allowance {allowance:.3e} [{'ok' if ok else 'FAIL'}]"
        )
        failed = failed or not ok
    print(f"worst relative gap: {worst:.3e}")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secloop",
        description="Secure closed-loop resource allocation solver and study harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one scenario file")
    p_solve.add_argument("scenario")
    p_solve.add_argument("--format", choices=("csv", "json"), default="json")
    p_solve.add_argument("--out", default=None)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep spec")
    p_sweep.add_argument("spec")
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.add_argument("--out", default=None)

    p_mc = sub.add_parser("montecarlo", help="run a Monte-Carlo spec")
    p_mc.add_argument("spec")
    p_mc.add_argument("--seed", type=int, default=None)
    p_mc.add_argument("--format", choices=("csv", "json"), default="csv")
    p_mc.add_argument("--out", default=None)

    p_verify = sub.add_parser("verify", help="certify the solver against the grid oracle")
    p_verify.add_argument("scenario")
    p_verify.add_argument("--count", type=int, default=1)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--points", type=int, default=600)
    p_verify.add_argument("--tol", type=float, default=1e-3)

    return parser


_COMMANDS = {
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "montecarlo": _cmd_montecarlo,
    "verify": _cmd_verify,
}


def cli_entry(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; remap to the documented code,
        # keeping 0 for --help
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SecloopError as exc:
        from .errors import ScenarioFormatError

        code = EXIT_USAGE if isinstance(exc, ScenarioFormatError) else EXIT_SOLVER
        print(f"error: {exc}", file=sys.stderr)
        return code


def main() -> None:
    sys.exit(cli_entry())


if __name__ == "__main__":
    main()
