from bingocache.harness.chart import build_chart, emit_chart
from bingocache.harness.experiment import (
    METRICS_COLUMNS,
    ExperimentConfig,
    MetricsRecord,
    generate_workload,
    run_experiment,
)
from bingocache.harness.sweep import expand_grid, records_frame, sweep, write_metrics
