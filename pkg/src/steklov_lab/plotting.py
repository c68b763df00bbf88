"""SVG line charts for sweep reports.

Figures are rendered with the Agg backend and written with a fixed hash salt
and no date metadata, so the same report always produces the same bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import AsymptoticsReport  # noqa: E402

STYLE = {
    "svg.hashsalt": "steklov-lab",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
}


def line_chart(
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    path: str | Path,
    *,
    xlabel: str,
    ylabel: str,
    title: str = "",
    loglog: bool = False,
) -> Path:
    path = Path(path)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        for label, y in series.items():
            ax.plot(x, y, marker="o", label=label)
        if loglog:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def _present(report: AsymptoticsReport, names: Sequence[str]) -> dict[str, list[float]]:
    out = {}
    for name in names:
        if report.rows and all(row.get(name) is not None for row in report.rows):
            out[name] = [float(v) for v in report.column(name)]
    return out


def plot_report(report: AsymptoticsReport, out_dir: str | Path) -> list[Path]:
    """Eigenvalue-vs-r and error-vs-r charts for reports with an ``r`` column."""
    out_dir = Path(out_dir)
    if not report.rows or "r" not in report.columns or report.name == "isoperimetric":
        # the isoperimetric rows repeat the shrinking-hole sweep
        return []
    r = [float(v) for v in report.column("r")]
    stem = "" if report.name in ("shrinking_hole", "shell_table") else f"_{report.name}"
    written = []
    values = _present(report, ["sigma1", "sigma2", "sigmabar1", "sigma1_shell_Rm", "sigma2_shell_RM", "dsigma2_dr"])
    if values:
        written.append(
            line_chart(r, values, out_dir / f"fig_sigma_vs_r{stem}.svg", xlabel="hole radius r", ylabel="eigenvalue", title=report.name)
        )
    errors = {k: v for k, v in _present(report, ["sigma2_gap", "h1_err_u1", "h1_err_u2", "abs_error"]).items() if min(v) > 0}
    if errors:
        written.append(
            line_chart(r, errors, out_dir / f"fig_error_vs_r{stem}.svg", xlabel="hole radius r", ylabel="error", title=report.name, loglog=True)
        )
    return written
