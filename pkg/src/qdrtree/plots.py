"""Figure rendering for benchmark reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_METRICS = [
    ("median_node_accesses", "Median node accesses"),
    ("median_ms", "Median query time (ms)"),
]


def render_report_figures(report, out_dir) -> list[Path]:
    """One figure per (sweep axis, metric): engine curves against the axis."""
    out_dir = Path(out_dir)
    written: list[Path] = []
    axes = sorted({row.axis for row in report.rows})
    for axis in axes:
        for metric, label in _METRICS:
            fig, ax = plt.subplots(figsize=(5.5, 4))
            for engine in report.config.engines:
                points = sorted(
                    (row.value, getattr(row, metric))
                    for row in report.rows
                    if row.axis == axis and row.engine == engine)
                if not points:
                    continue
                ax.plot([p[0] for p in points], [p[1] for p in points],
                        marker="o", label=engine)
            ax.set_xlabel(axis)
            ax.set_ylabel(label)
            ax.set_title(f"{label} vs {axis}")
            ax.legend()
            ax.grid(True, alpha=0.3)
            fig.tight_layout()
            path = out_dir / f"{axis}_{metric}.png"
            fig.savefig(path, dpi=120)
            plt.close(fig)
            written.append(path)
    return written
