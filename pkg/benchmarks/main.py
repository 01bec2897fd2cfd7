import argparse
import json
import os
import time

import numpy as np

from bingocache.community import EstimatedStructure
from bingocache.policies import EngineConfig, construct_policy
from bingocache.workload import (
    WorkloadConfig,
    generate_structure,
    simulate_requests,
    zipf_popularity,
)

parser = argparse.ArgumentParser()
parser.add_argument("--policy", default="BINGO", type=str)
parser.add_argument("--capacity", default=50, type=int)
parser.add_argument("--batch-size", default=40, type=int)
parser.add_argument("--alpha", default=0.8, type=float)
parser.add_argument("--nrequests", default=100000, type=int)
parser.add_argument("--nreps", default=1, type=int)
parser.add_argument("--seed", default=1234, type=int)
parser.add_argument("--detect", action="store_true")
parser.add_argument("--filename", default=None, type=str)


def main(policy, capacity, batch_size, alpha, nrequests, nreps, seed, detect, filename):
    if filename is not None:
        if os.path.isfile(filename):
            with open(filename) as file:
                logs = json.load(file)
            print("Extending existing logs from {}.".format(filename))
        else:
            print("Creating new logs in {}.".format(filename))
            logs = []
    else:
        logs = []

    logs.append(
        {
            "policy": policy,
            "capacity": capacity,
            "batch_size": batch_size,
            "alpha": alpha,
            "nrequests": nrequests,
            "nreps": nreps,
            "seed": seed,
            "detect": detect,
        }
    )

    config = WorkloadConfig(
        batch_size=batch_size, alpha=alpha, total_requests=nrequests, seed=seed
    )
    rng = np.random.default_rng(seed)
    start_time = time.time()
    popularity = zipf_popularity(alpha, config.num_files)
    structure = generate_structure(config, rng)
    trace = simulate_requests(structure, popularity, config, rng)
    logs[-1]["generation_time"] = time.time() - start_time
    logs[-1]["trace_digest"] = trace.digest()

    def build():
        return construct_policy(
            policy,
            capacity,
            popularity=popularity,
            rng=np.random.default_rng(seed),
            engine_config=EngineConfig(capacity=capacity),
            structure=None if detect else EstimatedStructure.from_structure(structure),
            detect=detect,
        )

    # first run includes numba compilation
    start_time = time.time()
    hits = build().run(trace)
    logs[-1]["dry_run_time"] = time.time() - start_time
    logs[-1]["hit_ratio"] = float(hits.mean()) if len(trace) else 0.0

    execution_times = []
    for _ in range(nreps):
        instance = build()
        start_time = time.time()
        instance.run(trace)
        execution_times.append(time.time() - start_time)
    logs[-1]["execution_time"] = np.mean(execution_times)
    logs[-1]["execution_time_std"] = np.std(execution_times)
    logs[-1]["requests_per_second"] = nrequests / logs[-1]["execution_time"]

    for k, v in logs[-1].items():
        print("{}: {}".format(k, v))
    print()

    if filename is not None:
        with open(filename, "w") as file:
            json.dump(logs, file)


if __name__ == "__main__":
    args = vars(parser.parse_args())
    main(**args)
