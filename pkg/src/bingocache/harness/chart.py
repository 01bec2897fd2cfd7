import matplotlib
import pandas as pd
from matplotlib.figure import Figure

from bingocache.config import raise_error

AXIS_LABELS = {
    "S": "Cache capacity S (files)",
    "B": "Batch size B (active communities)",
    "alpha": "Zipf exponent alpha",
}


def build_chart(frame, x_axis):
    """Figure with one line per policy: mean hit ratio across seeds against ``x_axis``."""
    if x_axis not in AXIS_LABELS:
        raise_error(ValueError, f"Unknown chart axis {x_axis}, choose from {list(AXIS_LABELS)}.")
    if "error" in frame:
        frame = frame[frame["error"].fillna("") == ""]
    if frame.empty:
        raise_error(ValueError, "No metrics rows to plot.")
    means = frame.groupby(["policy", x_axis])["hit_ratio"].mean()

    figure = Figure(figsize=(6.4, 4.4))
    axes = figure.add_subplot()
    for policy in sorted(frame["policy"].unique()):
        series = means.loc[policy].sort_index()
        (line,) = axes.plot(series.index, series.to_numpy(), marker="o", label=policy)
        line.set_gid(f"series-{policy}")
    axes.set_xlabel(AXIS_LABELS[x_axis])
    axes.set_ylabel("Hit ratio")
    axes.set_ylim(0, 1)
    axes.grid(alpha=0.3)
    axes.legend()
    return figure


def emit_chart(csv_path, x_axis, out_path):
    """Render the metrics CSV at ``csv_path`` as a self-contained SVG."""
    frame = pd.read_csv(csv_path)
    with matplotlib.rc_context({"svg.fonttype": "none", "svg.hashsalt": "bingocache"}):
        figure = build_chart(frame, x_axis)
        figure.savefig(out_path, format="svg", metadata={"Date": None})
    return out_path
