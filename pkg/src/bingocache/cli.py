import argparse
import json
import sys

from bingocache.config import log, raise_error
from bingocache.harness import (
    ExperimentConfig,
    emit_chart,
    generate_workload,
    records_frame,
    run_experiment,
    sweep,
    write_metrics,
)
from bingocache.harness.chart import AXIS_LABELS
from bingocache.workload import CommunityStructure, Trace, WorkloadConfig


def comma_list(kind):
    def parse(text):
        return [kind(item) for item in text.split(",") if item]

    return parse


def add_cell_flags(parser):
    parser.add_argument("--config", default=None, type=str)
    parser.add_argument("--seed", default=None, type=comma_list(int))
    parser.add_argument("--cache-capacity", default=None, type=comma_list(int))
    parser.add_argument("--batch-size", default=None, type=comma_list(int))
    parser.add_argument("--alpha", default=None, type=comma_list(float))
    parser.add_argument("--chunk-size", default=None, type=int)
    parser.add_argument("--policies", default=None, type=comma_list(str))
    parser.add_argument("--oracle", default=None, action=argparse.BooleanOptionalAction)
    parser.add_argument("--out", default=None, type=str)


parser = argparse.ArgumentParser(prog="bingocache")
subparsers = parser.add_subparsers(dest="command", required=True)

generate_parser = subparsers.add_parser("generate", help="generate a request trace")
generate_parser.add_argument("--config", default=None, type=str)
generate_parser.add_argument("--seed", default=None, type=comma_list(int))
generate_parser.add_argument("--batch-size", default=None, type=int)
generate_parser.add_argument("--alpha", default=None, type=float)
generate_parser.add_argument("--structure-out", default=None, type=str)
generate_parser.add_argument("--out", default="trace.csv", type=str)

run_parser = subparsers.add_parser("run", help="run policies on one cell")
add_cell_flags(run_parser)
run_parser.add_argument("--trace", default=None, type=str)
run_parser.add_argument("--structure", default=None, type=str)

sweep_parser = subparsers.add_parser("sweep", help="run a parameter grid")
add_cell_flags(sweep_parser)
sweep_parser.add_argument("--grid", default=None, type=str)
sweep_parser.add_argument("--jobs", default=None, type=int)

chart_parser = subparsers.add_parser("chart", help="plot a metrics csv")
chart_parser.add_argument("metrics", type=str)
chart_parser.add_argument("--axis", default="S", choices=sorted(AXIS_LABELS))
chart_parser.add_argument("--out", default="chart.svg", type=str)


def single(values, flag):
    if values is None:
        return None
    if len(values) != 1:
        raise_error(ValueError, f"{flag} takes a single value here, use `sweep` for grids.")
    return values[0]


def load_config(args):
    config = ExperimentConfig() if args.config is None else ExperimentConfig.from_json(args.config)
    if args.chunk_size is not None:
        config = config.replace(engine=config.engine.replace(chunk_size=args.chunk_size))
    if args.policies is not None:
        config = config.replace(policies=tuple(args.policies))
    if args.oracle is not None:
        config = config.replace(oracle=args.oracle)
    if args.seed is not None:
        config = config.replace(seeds=tuple(args.seed))
    return config


def generate(args):
    config = WorkloadConfig() if args.config is None else WorkloadConfig.from_json(args.config)
    if args.batch_size is not None:
        config = config.replace(batch_size=args.batch_size)
    if args.alpha is not None:
        config = config.replace(alpha=args.alpha)
    if args.seed is not None:
        config = config.replace(seed=single(args.seed, "--seed"))
    structure, trace = generate_workload(config, config.seed)
    trace.to_csv(args.out)
    if args.structure_out is not None:
        structure.save(args.structure_out)
    log.info("Wrote %d requests to %s (digest %s).", len(trace), args.out, trace.digest())


def run(args):
    config = load_config(args)
    config = config.with_cell(
        single(args.cache_capacity, "--cache-capacity"),
        single(args.batch_size, "--batch-size"),
        single(args.alpha, "--alpha"),
    )
    trace = None if args.trace is None else Trace.from_csv(args.trace)
    structure = None
    if args.structure is not None:
        structure = CommunityStructure.load(args.structure, config.workload.num_users)
    records = []
    for seed in config.seeds:
        records.extend(run_experiment(config, seed, trace=trace, structure=structure))
    frame = records_frame(records)
    write_metrics(frame, args.out or sys.stdout)


def run_sweep(args):
    config = load_config(args)
    grid = {}
    if args.grid is not None:
        with open(args.grid) as file:
            grid = json.load(file)
    for axis, values in (("S", args.cache_capacity), ("B", args.batch_size), ("alpha", args.alpha)):
        if values is not None:
            grid[axis] = values
    frame = sweep(grid, config, jobs=args.jobs)
    write_metrics(frame, args.out or sys.stdout)


def chart(args):
    emit_chart(args.metrics, args.axis, args.out)
    log.info("Wrote %s chart to %s.", args.axis, args.out)


COMMANDS = {"generate": generate, "run": run, "sweep": run_sweep, "chart": chart}


def main(argv=None):
    args = parser.parse_args(argv)
    COMMANDS[args.command](args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
