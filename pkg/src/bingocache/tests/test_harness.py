import json

import numpy as np
import pandas as pd
import pytest

from bingocache import cli
from bingocache.config import POLICY_NAMES
from bingocache.harness import (
    METRICS_COLUMNS,
    ExperimentConfig,
    build_chart,
    emit_chart,
    expand_grid,
    generate_workload,
    records_frame,
    run_experiment,
    sweep,
    write_metrics,
)
from bingocache.harness.experiment import EMPTY_TRACE
from bingocache.policies import EngineConfig
from bingocache.tests.utils import make_trace
from bingocache.workload import CommunityStructure, Trace, WorkloadConfig


def small_config(**changes):
    config = ExperimentConfig(
        workload=WorkloadConfig(
            num_users=200,
            num_communities=10,
            min_size=5,
            max_size=20,
            batch_size=5,
            total_requests=2000,
            num_files=1000,
        ),
        engine=EngineConfig(capacity=10, chunk_size=500),
        seeds=(0, 1),
        timing=False,
    )
    return config.replace(**changes)


def test_run_experiment_reports_every_policy():
    records = run_experiment(small_config(), seed=0)
    assert [r.policy for r in records] == list(POLICY_NAMES)
    for record in records:
        assert record.requests == 2000
        assert 0 <= record.hits <= record.requests
        assert record.hit_ratio == record.hits / record.requests
        assert record.seconds == 0.0
        assert record.error == ""
        assert (record.S, record.B, record.alpha, record.seed) == (10, 5, 0.8, 0)


def test_run_experiment_is_reproducible():
    for oracle in (True, False):
        config = small_config(oracle=oracle)
        assert run_experiment(config, seed=3) == run_experiment(config, seed=3)


def test_compulsory_misses_only():
    config = small_config(policies=("LRU",)).with_cell(capacity=50)
    trace = make_trace([1, 2, 3, 1, 2, 3, 4, 1])
    (record,) = run_experiment(config.replace(oracle=False), seed=0, trace=trace)
    assert record.hits == 4
    assert record.hit_ratio == 0.5


def test_empty_trace_is_flagged():
    config = small_config(oracle=False)
    records = run_experiment(config, seed=0, trace=Trace.empty())
    for record in records:
        assert record.hit_ratio == 0.0
        assert record.error == EMPTY_TRACE


def test_oracle_needs_structure_for_external_trace():
    with pytest.raises(ValueError):
        run_experiment(small_config(), seed=0, trace=make_trace([1, 2]))
    structure = CommunityStructure(({0, 1},), num_users=200)
    records = run_experiment(small_config(), seed=0, trace=make_trace([1, 2]), structure=structure)
    assert len(records) == len(POLICY_NAMES)


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        small_config(policies=("LRU", "ARC")).validate()
    with pytest.raises(ValueError):
        small_config(seeds=()).validate()
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"workload": {}, "cache": 3})


def test_experiment_config_json(tmp_path):
    config = small_config(policies=("lru", "bingo"))
    assert config.policies == ("LRU", "BINGO")
    path = tmp_path / "config.json"
    config.to_json(path)
    assert ExperimentConfig.from_json(path) == config


def test_expand_grid():
    cells = expand_grid({"S": [10, 20], "alpha": [0.6, 1.0]}, small_config())
    assert cells == [
        {"S": 10, "B": 5, "alpha": 0.6},
        {"S": 10, "B": 5, "alpha": 1.0},
        {"S": 20, "B": 5, "alpha": 0.6},
        {"S": 20, "B": 5, "alpha": 1.0},
    ]
    with pytest.raises(ValueError):
        expand_grid({"N": [1]}, small_config())
    with pytest.raises(ValueError):
        expand_grid({"S": []}, small_config())


def test_sweep_rows_and_order():
    frame = sweep({"S": [50, 100], "B": [10], "alpha": [0.6]}, small_config(), jobs=1)
    assert list(frame.columns) == list(METRICS_COLUMNS)
    assert len(frame) == 2 * 2 * len(POLICY_NAMES)
    keys = list(zip(frame["S"], frame["B"], frame["alpha"], frame["policy"], frame["seed"]))
    assert keys == sorted(keys)
    assert (frame["error"] == "").all()


def test_sweep_csv_is_reproducible(tmp_path):
    paths = [tmp_path / "first.csv", tmp_path / "second.csv"]
    for path in paths:
        write_metrics(sweep({"S": [5, 20]}, small_config(), jobs=1), path)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].read_text().splitlines()[0] == ",".join(METRICS_COLUMNS)


def test_sweep_records_failing_cells():
    frame = sweep({"S": [0, 10]}, small_config(policies=("LRU", "FIFO")), jobs=1)
    failed = frame[frame["S"] == 0]
    assert len(failed) == 4
    assert (failed["error"] != "").all()
    assert (frame[frame["S"] == 10]["error"] == "").all()


def test_mpc_and_lru_grow_with_capacity():
    frame = sweep({"S": [5, 20, 80]}, small_config(policies=("LRU", "MPC"), seeds=(0,)), jobs=1)
    for _, group in frame.groupby("policy"):
        hits = group.sort_values("S")["hits"].tolist()
        assert hits == sorted(hits)


def metrics_frame(values):
    rows = []
    for policy in POLICY_NAMES:
        for s, ratio in values:
            rows.append(
                {"policy": policy, "S": s, "B": 40, "alpha": 0.8, "seed": 0, "hit_ratio": ratio}
            )
    return pd.DataFrame(rows)


def test_build_chart():
    figure = build_chart(metrics_frame([(50, 0.2), (100, 0.4)]), "S")
    (axes,) = figure.axes
    assert len(axes.get_lines()) == len(POLICY_NAMES)
    assert axes.get_ylim() == (0, 1)
    for line in axes.get_lines():
        np.testing.assert_allclose(line.get_ydata(), [0.2, 0.4])


def test_build_chart_single_point():
    figure = build_chart(metrics_frame([(50, 0.3)]), "S")
    assert all(len(line.get_xdata()) == 1 for line in figure.axes[0].get_lines())


def test_build_chart_errors():
    with pytest.raises(ValueError):
        build_chart(metrics_frame([]), "S")
    with pytest.raises(ValueError):
        build_chart(metrics_frame([(50, 0.3)]), "N")


def test_emit_chart(tmp_path):
    csv_path = tmp_path / "metrics.csv"
    records = run_experiment(small_config(), seed=0)
    write_metrics(records_frame(records), csv_path)
    out_path = tmp_path / "chart.svg"
    emit_chart(csv_path, "S", out_path)
    svg = out_path.read_text()
    for policy in POLICY_NAMES:
        assert f'id="series-{policy}"' in svg
    first = out_path.read_bytes()
    emit_chart(csv_path, "S", out_path)
    assert out_path.read_bytes() == first


def test_cli(tmp_path):
    workload = small_config().workload.replace(total_requests=500)
    workload_path = tmp_path / "workload.json"
    workload_path.write_text(json.dumps(workload.to_dict()))
    trace_path = tmp_path / "trace.csv"
    structure_path = tmp_path / "structure.txt"
    assert (
        cli.main(
            [
                "generate",
                "--config",
                str(workload_path),
                "--out",
                str(trace_path),
                "--structure-out",
                str(structure_path),
            ]
        )
        == 0
    )
    assert len(Trace.from_csv(trace_path)) == 500

    config_path = tmp_path / "experiment.json"
    small_config(workload=workload).to_json(config_path)
    metrics_path = tmp_path / "metrics.csv"
    cli.main(
        [
            "run",
            "--config",
            str(config_path),
            "--trace",
            str(trace_path),
            "--structure",
            str(structure_path),
            "--seed",
            "0",
            "--out",
            str(metrics_path),
        ]
    )
    frame = pd.read_csv(metrics_path)
    assert sorted(frame["policy"]) == sorted(POLICY_NAMES)
    assert (frame["requests"] == 500).all()

    sweep_path = tmp_path / "sweep.csv"
    cli.main(
        [
            "sweep",
            "--config",
            str(config_path),
            "--cache-capacity",
            "5,10",
            "--policies",
            "LRU,BINGO",
            "--jobs",
            "1",
            "--out",
            str(sweep_path),
        ]
    )
    assert len(pd.read_csv(sweep_path)) == 2 * 2 * 2

    chart_path = tmp_path / "chart.svg"
    cli.main(["chart", str(sweep_path), "--axis", "S", "--out", str(chart_path)])
    assert 'id="series-LRU"' in chart_path.read_text()


def test_default_cell_gain_and_traffic_trend():
    base = ExperimentConfig(seeds=(0, 1), timing=False)
    base = base.replace(workload=base.workload.replace(total_requests=2 * 10**4))
    assert (base.capacity, base.workload.batch_size) == (20, 40)
    frame = sweep({"B": [5, 40, 80]}, base, jobs=1)
    assert (frame["error"] == "").all()
    means = frame.groupby(["policy", "B"])["hit_ratio"].mean().unstack("B")
    assert means.loc["BINGO", 40] > means.drop(index="BINGO")[40].max()
    for policy in ("BINGO", "FIFO", "LRU", "RND"):
        assert np.all(np.diff(means.loc[policy].to_numpy()) < 0)


def test_generated_trace_matches_experiment(tmp_path):
    config = small_config(policies=("LRU", "BINGO"))
    workload_path = tmp_path / "workload.json"
    workload_path.write_text(json.dumps(config.workload.to_dict()))
    trace_path = tmp_path / "trace.csv"
    structure_path = tmp_path / "structure.txt"
    cli.main(
        [
            "generate",
            "--config",
            str(workload_path),
            "--seed",
            "3",
            "--out",
            str(trace_path),
            "--structure-out",
            str(structure_path),
        ]
    )
    trace = Trace.from_csv(trace_path)
    structure = CommunityStructure.load(structure_path, config.workload.num_users)
    assert trace.digest() == generate_workload(config.workload, 3)[1].digest()
    assert run_experiment(config, seed=3, trace=trace, structure=structure) == run_experiment(
        config, seed=3
    )
