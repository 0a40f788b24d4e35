"""Optional SVG line plots for indicator comparisons across runs."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

from . import stats


def _load_series(path: Path) -> dict[str, dict[int, list[float]]]:
    """Merged indicator CSV -> label -> month -> values across runs.

    Runs are labeled by scenario (and embedded sweep tag in the run id).
    """
    series: dict[str, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    with path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            if row["value"] == "":
                continue
            label = row["run_id"].rsplit("_r", 1)[0]
            series[label][int(row["month"])].append(float(row["value"]))
    return series


def plot_indicators(out_dir: str | Path, names: list[str] | None = None) -> list[Path]:
    """One SVG per indicator, mean trajectory per label, from merged CSVs."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "polisim"

    out = Path(out_dir)
    merged = out / "merged"
    plots_dir = out / "plots"
    plots_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in names or stats.SCALAR_INDICATORS:
        src = merged / f"{name}.csv"
        if not src.exists():
            continue
        series = _load_series(src)
        if not series:
            continue
        fig, ax = plt.subplots(figsize=(7, 4))
        for label in sorted(series):
            months = sorted(series[label])
            means = [sum(series[label][m]) / len(series[label][m]) for m in months]
            ax.plot(months, means, label=label, linewidth=1.2)
        ax.set_xlabel("month")
        ax.set_ylabel(name.replace("_", " "))
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = plots_dir / f"{name}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written
