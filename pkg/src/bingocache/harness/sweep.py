import concurrent.futures
import itertools
import sys

import pandas as pd

from bingocache.config import log, raise_error
from bingocache.harness.experiment import METRICS_COLUMNS, MetricsRecord, run_experiment

GRID_AXES = ("S", "B", "alpha")
SORT_KEYS = ["S", "B", "alpha", "policy", "seed"]


def default_jobs():
    import psutil

    if sys.platform == "darwin":  # pragma: no cover
        return psutil.cpu_count(logical=False)
    return len(psutil.Process().cpu_affinity())


def expand_grid(grid, config):
    """Cartesian product of the grid axes; missing axes take the base config value."""
    unknown = set(grid) - set(GRID_AXES)
    if unknown:
        raise_error(ValueError, f"Unknown grid axes: {sorted(unknown)}.")
    axes = {
        "S": grid.get("S", [config.capacity]),
        "B": grid.get("B", [config.workload.batch_size]),
        "alpha": grid.get("alpha", [config.workload.alpha]),
    }
    for name, values in axes.items():
        if not len(values):
            raise_error(ValueError, f"Grid axis {name} is empty.")
    return [
        {"S": int(s), "B": int(b), "alpha": float(a)}
        for s, b, a in itertools.product(axes["S"], axes["B"], axes["alpha"])
    ]


def _run_cell(task):
    config, cell, seed = task
    try:
        cell_config = config.with_cell(cell["S"], cell["B"], cell["alpha"])
        return [record.as_row() for record in run_experiment(cell_config, seed)]
    except Exception as exception:  # pylint: disable=broad-except
        log.error("Cell %s seed %d failed: %r", cell, seed, exception)
        return [
            MetricsRecord(
                policy=policy,
                S=cell["S"],
                B=cell["B"],
                alpha=cell["alpha"],
                seed=seed,
                requests=0,
                hits=0,
                hit_ratio=0.0,
                seconds=0.0,
                error=repr(exception),
            ).as_row()
            for policy in config.policies
        ]


def sweep(grid, config, jobs=None):
    """Run every (cell, seed) of the grid and return the sorted metrics table."""
    config.validate()
    cells = expand_grid(grid, config)
    tasks = [(config, cell, seed) for cell in cells for seed in config.seeds]
    jobs = default_jobs() if jobs is None else jobs
    log.info("Sweeping %d cells x %d seeds on %d workers.", len(cells), len(config.seeds), jobs)
    if jobs <= 1:
        results = list(map(_run_cell, tasks))
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(_run_cell, tasks))
    rows = [row for result in results for row in result]
    frame = pd.DataFrame(rows, columns=list(METRICS_COLUMNS))
    return frame.sort_values(SORT_KEYS, kind="stable").reset_index(drop=True)


def records_frame(records):
    frame = pd.DataFrame([r.as_row() for r in records], columns=list(METRICS_COLUMNS))
    return frame.sort_values(SORT_KEYS, kind="stable").reset_index(drop=True)


def write_metrics(frame, path):
    frame.to_csv(path, index=False)
