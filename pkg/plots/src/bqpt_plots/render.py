"""Figure rendering for sweep criterion tables.

One figure per criterion: the criterion against the number of copies per
state K, both axes logarithmic, error bars from the recorded spread, legend
labelled with the fixed preparation budget N*K. Output is static SVG and/or
PNG; SVG metadata timestamps are disabled so reruns are byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .reader import CRITERION_FILES, SweepFormatError, SweepTable, read_sweep_dir

# Stable ids inside SVG output.
plt.rcParams["svg.hashsalt"] = "bqpt-plots"

TITLES = {
    "nrmse_v": "NRMSE of v",
    "nrmse_w1": "NRMSE of w1",
    "nrmse_w2": "NRMSE of w2",
    "m_rel_error": "Mean relative error of the propagator",
}

FORMATS = ("svg", "png")


def render_table(table: SweepTable, out_base: Path, formats=FORMATS) -> list[Path]:
    """Render one criterion table to out_base.<fmt>; returns written paths."""
    rows = table.plottable_rows()
    if not rows:
        raise SweepFormatError(out_base.with_suffix(".csv"), "no finite rows to plot")
    ks = [r.k for r in rows]
    means = [r.mean for r in rows]
    stds = [r.std for r in rows]

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.errorbar(
        ks,
        means,
        yerr=stds,
        marker="o",
        capsize=3,
        linewidth=1.2,
        label=f"NK = {table.budget:g}",
    )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("copies per state K")
    ax.set_ylabel(TITLES.get(table.criterion, table.criterion))
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()

    written = []
    for fmt in formats:
        path = out_base.with_suffix(f".{fmt}")
        metadata = {"Date": None} if fmt == "svg" else {}
        fig.savefig(path, format=fmt, metadata=metadata)
        written.append(path)
    plt.close(fig)
    return written


def render_figures(csv_dir: str | Path, out_dir: str | Path, formats=FORMATS) -> list[Path]:
    """Render the four criterion figures of a completed sweep.

    All four CSVs are read and validated before anything is written, so a
    corrupt input produces no partial output.
    """
    tables = read_sweep_dir(csv_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in CRITERION_FILES:
        table = tables[name]
        written.extend(render_table(table, out_dir / Path(name).stem, formats))
    return written
