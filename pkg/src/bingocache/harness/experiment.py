import dataclasses
import json
import time
from typing import Tuple

import numpy as np

from bingocache.community import EstimatedStructure, average_f1
from bingocache.config import DEFAULT_SEEDS, POLICY_NAMES, log, raise_error
from bingocache.policies import BingoPolicy, EngineConfig, construct_policy
from bingocache.workload import (
    WorkloadConfig,
    generate_structure,
    simulate_requests,
    zipf_popularity,
)

METRICS_COLUMNS = (
    "policy",
    "S",
    "B",
    "alpha",
    "seed",
    "requests",
    "hits",
    "hit_ratio",
    "seconds",
    "error",
)
EMPTY_TRACE = "degenerate: empty trace"


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    workload: WorkloadConfig = dataclasses.field(default_factory=WorkloadConfig)
    engine: EngineConfig = dataclasses.field(default_factory=EngineConfig)
    policies: Tuple[str, ...] = POLICY_NAMES
    oracle: bool = True
    seeds: Tuple[int, ...] = DEFAULT_SEEDS
    timing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "policies", tuple(p.upper() for p in self.policies))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @property
    def capacity(self):
        return self.engine.capacity

    def validate(self):
        if not self.policies:
            raise_error(ValueError, "At least one policy must be selected.")
        unknown = set(self.policies) - set(POLICY_NAMES)
        if unknown:
            raise_error(ValueError, f"Unknown policies: {sorted(unknown)}.")
        if not self.seeds:
            raise_error(ValueError, "At least one seed must be given.")
        self.workload.validate()
        self.engine.validate()
        return self

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def with_cell(self, capacity=None, batch_size=None, alpha=None):
        engine, workload = self.engine, self.workload
        if capacity is not None:
            engine = engine.replace(capacity=int(capacity))
        if batch_size is not None:
            workload = workload.replace(batch_size=int(batch_size))
        if alpha is not None:
            workload = workload.replace(alpha=float(alpha))
        return self.replace(engine=engine, workload=workload)

    def to_dict(self):
        return {
            "workload": self.workload.to_dict(),
            "engine": self.engine.to_dict(),
            "policies": list(self.policies),
            "oracle": self.oracle,
            "seeds": list(self.seeds),
            "timing": self.timing,
        }

    @classmethod
    def from_dict(cls, data):
        names = {field.name for field in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise_error(ValueError, f"Unknown experiment config keys: {sorted(unknown)}.")
        data = dict(data)
        if "workload" in data:
            data["workload"] = WorkloadConfig.from_dict(data["workload"])
        if "engine" in data:
            data["engine"] = EngineConfig.from_dict(data["engine"])
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path) as file:
            return cls.from_dict(json.load(file))

    def to_json(self, path):
        with open(path, "w") as file:
            json.dump(self.to_dict(), file, indent=2)


@dataclasses.dataclass(frozen=True)
class MetricsRecord:
    policy: str
    S: int
    B: int
    alpha: float
    seed: int
    requests: int
    hits: int
    hit_ratio: float
    seconds: float
    error: str = ""

    def as_row(self):
        return dataclasses.asdict(self)


def _streams(seed):
    structure_seq, trace_seq, policy_seq = np.random.SeedSequence(seed).spawn(3)
    return structure_seq, trace_seq, policy_seq


def generate_workload(workload: WorkloadConfig, seed: int, popularity=None):
    """Ground-truth structure and trace that experiments with ``seed`` run on."""
    structure_seq, trace_seq, _ = _streams(seed)
    if popularity is None:
        popularity = zipf_popularity(workload.alpha, workload.num_files)
    structure = generate_structure(workload, np.random.default_rng(structure_seq))
    trace = simulate_requests(structure, popularity, workload, np.random.default_rng(trace_seq))
    return structure, trace


def run_experiment(config: ExperimentConfig, seed: int, trace=None, structure=None):
    """Run every selected policy on one trace and return one record per policy.

    Without ``trace`` a structure and a trace are generated from ``seed``.
    In oracle mode the engine starts from the ground-truth structure and
    never re-estimates it; MPC always receives the true popularity.
    """
    config.validate()
    workload = config.workload
    popularity = zipf_popularity(workload.alpha, workload.num_files)
    if trace is None:
        structure, trace = generate_workload(workload, seed, popularity)
    elif config.oracle and structure is None:
        raise_error(ValueError, "Oracle mode needs the ground-truth structure of the trace.")
    policy_seq = _streams(seed)[2]

    digest = trace.digest()
    log.info(
        "Seed %d: S=%d B=%d alpha=%s, %d requests.",
        seed,
        config.capacity,
        workload.batch_size,
        workload.alpha,
        len(trace),
    )
    records = []
    for name in config.policies:
        policy = construct_policy(
            name,
            config.capacity,
            popularity=popularity,
            rng=np.random.default_rng(policy_seq),
            engine_config=config.engine,
            structure=EstimatedStructure.from_structure(structure) if config.oracle else None,
            detect=not config.oracle,
        )
        log.info("%s consumes trace %s.", name, digest)
        start_time = time.time()
        hits = int(policy.run(trace).sum())
        seconds = time.time() - start_time if config.timing else 0.0
        if isinstance(policy, BingoPolicy):
            policy.close()
            log.info("BINGO counters: %s.", policy.counters())
            if not config.oracle and structure is not None and policy.structure is not None:
                log.info(
                    "Estimated structure F1 against ground truth: %.3f.",
                    average_f1(structure, policy.structure),
                )
        requests = len(trace)
        records.append(
            MetricsRecord(
                policy=name,
                S=config.capacity,
                B=workload.batch_size,
                alpha=workload.alpha,
                seed=seed,
                requests=requests,
                hits=hits,
                hit_ratio=hits / requests if requests else 0.0,
                seconds=seconds,
                error="" if requests else EMPTY_TRACE,
            )
        )
    return records
