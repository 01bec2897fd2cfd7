"""Trend and gain report over the default experiment cell.

Checks that the simulator reproduces the qualitative behaviour expected from
community-aware caching: gain over every baseline on the default cell,
decreasing hit ratio with traffic volume, increasing hit ratio with capacity
and popularity skew.
"""
import argparse
import time

import numpy as np

from bingocache.harness import ExperimentConfig, sweep

parser = argparse.ArgumentParser()
parser.add_argument("--seeds", default=10, type=int)
parser.add_argument("--nrequests", default=100000, type=int)
parser.add_argument("--jobs", default=None, type=int)
parser.add_argument("--tolerance", default=0.01, type=float)
parser.add_argument("--filename", default=None, type=str)

BASELINES = ("FIFO", "LRU", "LFU", "MPC", "RND")


def means(frame, axis):
    return frame.groupby(["policy", axis])["hit_ratio"].mean().unstack(axis)


def monotone(values, tolerance, increasing=True):
    steps = np.diff(values)
    return bool(np.all(steps >= -tolerance) if increasing else np.all(steps <= tolerance))


def main(seeds, nrequests, jobs, tolerance, filename):
    base = ExperimentConfig(seeds=tuple(range(seeds)))
    base = base.replace(workload=base.workload.replace(total_requests=nrequests), timing=False)
    report = []
    start_time = time.time()

    cell = sweep({}, base, jobs=jobs)
    pivot = cell.pivot_table(index="seed", columns="policy", values="hit_ratio")
    best = pivot[list(BASELINES)].max(axis=1)
    gains = (pivot["BINGO"] - best) / best.where(best > 0)
    mean_ratio = pivot.mean()
    beats_all = all(mean_ratio["BINGO"] > mean_ratio[b] for b in BASELINES)
    report.append(("BINGO beats every baseline on the default cell", beats_all))
    report.append(("median relative gain >= 10%", float(gains.median()) >= 0.10))
    print("Default cell mean hit ratios:")
    print(mean_ratio.to_string())
    print("Median gain over best baseline: {:.1%}".format(gains.median()))

    traffic = means(sweep({"B": [5, 10, 20, 40, 80]}, base, jobs=jobs), "B")
    report.append(
        (
            "hit ratio non-increasing in B",
            all(monotone(row.to_numpy(), tolerance, increasing=False) for _, row in traffic.iterrows()),
        )
    )

    capacity = means(sweep({"S": [20, 50, 100, 200]}, base, jobs=jobs), "S")
    report.append(
        (
            "hit ratio non-decreasing in S",
            all(monotone(row.to_numpy(), tolerance) for _, row in capacity.iterrows()),
        )
    )
    gap = capacity.loc["BINGO"] - capacity.loc[list(BASELINES)].max()
    report.append(("BINGO gap does not shrink with S", monotone(gap.to_numpy(), tolerance)))

    popularity = means(sweep({"alpha": [0.4, 0.6, 0.8, 1.0]}, base, jobs=jobs), "alpha")
    moderate = popularity[[0.4, 0.6, 0.8]]
    report.append(
        (
            "hit ratio non-decreasing in alpha up to 0.8",
            all(monotone(row.to_numpy(), tolerance) for _, row in moderate.iterrows()),
        )
    )
    step = popularity[1.0] - popularity[0.8]
    report.append(
        (
            "MPC/LFU/LRU step at alpha=1.0 larger than BINGO",
            all(step[p] > step["BINGO"] for p in ("MPC", "LFU", "LRU")),
        )
    )

    best_gain = float(gains.max())
    print("Largest per-seed gain: {:.1%} (30-34% band reached: {})".format(best_gain, best_gain >= 0.30))
    print()
    for name, passed in report:
        print("[{}] {}".format("PASS" if passed else "FAIL", name))
    print("Elapsed: {:.1f} s".format(time.time() - start_time))
    if filename is not None:
        cell.to_csv(filename, index=False)


if __name__ == "__main__":
    args = vars(parser.parse_args())
    main(**args)
