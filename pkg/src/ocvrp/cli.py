"""Command line entry point: ``ocvrp solve | bench | gen``.

Exit codes: 0 success, 1 infeasible instance, 2 bad input file or arguments.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .aco import preset
from .baseline import BaselineParams, FirstSolutionStrategy
from .errors import ConsistencyError, FormatError, Infeasible, IoError
from .harness.experiment import ExperimentSpec, run_experiment, timed_solve
from .harness.export import export_geojson, export_solution, export_trace, format_table
from .harness.instances import GeneratorSpec, dumps, generate_instance, load_instance, save_instance, write_text

EXIT_OK, EXIT_INFEASIBLE, EXIT_FORMAT = 0, 1, 2

log = logging.getLogger("ocvrp")


def _baseline_params(args) -> BaselineParams:
    return BaselineParams(
        strategy=FirstSolutionStrategy(args.strategy),
        time_limit=args.time_limit,
        budget_moves=args.budget_moves,
        lambda_factor=args.lambda_factor,
        seed=args.seed,
    )


def _add_baseline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=[s.value for s in FirstSolutionStrategy], default="auto")
    stop = p.add_mutually_exclusive_group()
    stop.add_argument("--time-limit", type=float, default=5.0, metavar="S", help="GLS wall-clock limit")
    stop.add_argument("--budget-moves", type=int, default=None, metavar="N",
                      help="deterministic stop after N local-search steps")
    p.add_argument("--lambda-factor", type=float, default=0.1)


def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    if args.solver == "aco":
        overrides = {"seed": args.seed}
        if args.iterations:
            overrides["iterations"] = args.iterations
        if args.ants:
            overrides["ants"] = args.ants
        params = preset(args.preset, **overrides)
    else:
        params = _baseline_params(args)
    rows: list = []
    solution = timed_solve(instance, args.solver, params, rows.append)
    export_solution(solution, args.out, instance.name)
    if args.trace:
        export_trace(rows, args.trace)
    if args.geojson:
        export_geojson(instance, solution, args.geojson)
    print(f"{instance.name}: {solution.total_distance:.3f} km, {len(solution.routes)} routes, "
          f"{solution.meta['wall_time']:.2f} s")
    return EXIT_OK


def cmd_bench(args) -> int:
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    specs = []
    for name in solvers:
        if name == "baseline":
            args.seed = args.seed_base
            specs.append(ExperimentSpec(args.instance, "baseline", _baseline_params(args), args.runs,
                                        args.seed_base, label="baseline", parallel=args.parallel))
        else:
            overrides = {}
            if args.iterations:
                overrides["iterations"] = args.iterations
            if args.ants:
                overrides["ants"] = args.ants
            specs.append(ExperimentSpec(args.instance, "aco", preset(name, **overrides), args.runs,
                                        args.seed_base, label=f"aco-{name}", parallel=args.parallel))
    reports = []
    for spec in specs:
        report, trace = run_experiment(spec)
        reports.append(report)
        if args.trace_dir:
            tdir = Path(args.trace_dir)
            tdir.mkdir(parents=True, exist_ok=True)
            for run, rows in trace.runs.items():
                export_trace(rows, tdir / f"{spec.label}_run{run:02d}.csv")
    write_text(args.out, dumps({"reports": [r.to_dict() for r in reports]}))
    table = format_table(reports)
    if args.table:
        write_text(args.table, table)
    print(table, end="")
    return EXIT_OK


def cmd_gen(args) -> int:
    bbox = tuple(float(x) for x in args.bbox.split(","))
    if len(bbox) != 4:
        raise argparse.ArgumentTypeError("--bbox needs LAT1,LON1,LAT2,LON2")
    spec = GeneratorSpec(
        n=args.n, vehicles=args.vehicles, capacity=args.capacity, clusters=args.clusters,
        spread_km=args.spread, bbox=bbox, seed=args.seed, name=args.name,
    )
    instance = generate_instance(spec)
    save_instance(instance, args.out, args.matrix)
    print(f"wrote {args.out} ({spec.n} customers, {spec.vehicles} vehicles x {spec.capacity:g})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ocvrp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance once")
    p.add_argument("--instance", required=True)
    p.add_argument("--solver", choices=["aco", "baseline"], required=True)
    p.add_argument("--preset", choices=["exploitation", "exploration"], default="exploitation")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--ants", type=int, default=None)
    _add_baseline_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--trace")
    p.add_argument("--geojson")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="seeded multi-run comparison")
    p.add_argument("--instance", required=True)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--solvers", default="exploration,exploitation,baseline",
                   help="comma list of ACO presets and/or 'baseline'")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--ants", type=int, default=None)
    _add_baseline_args(p)
    p.add_argument("--parallel", action="store_true", help="run seeds concurrently (timings off-protocol)")
    p.add_argument("--trace-dir")
    p.add_argument("--out", required=True)
    p.add_argument("--table")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="generate a synthetic unit-demand instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--vehicles", type=int, required=True)
    p.add_argument("--capacity", type=float, required=True)
    p.add_argument("--clusters", type=int, default=0)
    p.add_argument("--spread", type=float, default=2.0, metavar="KM")
    p.add_argument("--bbox", default="29.90,31.10,30.20,31.50")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name")
    p.add_argument("--out", required=True)
    p.add_argument("--matrix")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (FormatError, ConsistencyError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (ValueError, argparse.ArgumentTypeError, IoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
