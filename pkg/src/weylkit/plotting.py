"""Optional figure rendering for grid-based reports.

Figures are a side output next to the delimited report and never feed back
into it, so report bytes stay reproducible whether or not a figure was
requested. Only the tasks with a natural x-axis have figures.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from weylkit.errors import ValidationError
from weylkit.report import Report

PLOTTABLE_TASKS = ("multiplicity", "spectrum", "invert", "compare")


def _plot_profile(ax, grid, d, excluded) -> None:
    ax.step(grid, d, where="mid", lw=1.5)
    if excluded:
        ax.plot([grid[i] for i in excluded], [d[i] for i in excluded], "rx", ms=6, label="excluded")
        ax.legend(loc="best")
    ax.set_xlabel("t")
    ax.set_ylabel("d(t)")


def render_plot(report: Report, path: str) -> None:
    """Write one PNG/PDF figure (format from the path suffix) for the report."""
    task = report.task
    if task not in PLOTTABLE_TASKS:
        raise ValidationError(f"no figure defined for task {task!r}; plottable: {list(PLOTTABLE_TASKS)}")
    r = report.result
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    if task in ("multiplicity", "spectrum"):
        _plot_profile(ax, r["grid"], r["d"], r["excluded"])
        ax.set_title("boundary multiplicity profile")
        if task == "spectrum":
            for piece in r["spectrum"]["intervals"]:
                a, b = piece["a"], piece["b"]
                if isinstance(a, str) or isinstance(b, str):
                    continue
                ax.axvspan(a, b, color="tab:blue", alpha=0.15)
            ax.set_title("ac spectrum and multiplicity profile")
    elif task == "invert":
        dim = r["measure"]["dim"]
        mids, diags = [], [[] for _ in range(dim)]
        for piece in r["measure"]["ac"]:
            mids.append(0.5 * (piece["a"] + piece["b"]))
            entries = piece["density"]["entries"]
            for i in range(dim):
                diags[i].append(entries[i * dim + i][0])
        for i in range(dim):
            ax.plot(mids, diags[i], lw=1.2, label=f"density[{i},{i}]")
        ax.set_xlabel("t")
        ax.set_ylabel("density")
        ax.set_title("recovered spectral density (diagonal)")
        ax.legend(loc="best")
    elif task == "compare":
        grid = r["grid"]
        ax.step(grid, r["d1"], where="mid", lw=1.5, label="d1")
        ax.step(grid, r["d2"], where="mid", lw=1.2, ls="--", label="d2")
        if r["excluded"]:
            ax.plot([grid[i] for i in r["excluded"]], [r["d1"][i] for i in r["excluded"]], "rx", ms=6)
        ax.set_xlabel("t")
        ax.set_ylabel("d(t)")
        ax.set_title(f"extension comparison: {r['verdict']}")
        ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
