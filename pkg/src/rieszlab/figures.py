"""Figure rendering for report files, headless backend only."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend pinned first)


def render_report(report: dict, out_dir) -> list:
    """One PNG per report holding every plot series; [] when there is none."""
    series = report.get("plot_series", [])
    if not series:
        return []
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7.0, 4.5), dpi=110)
    spread = 1.0
    positive = True
    for s in series:
        ax.plot(s["x"], s["y"], marker=".", linewidth=1.2, label=str(s["series"]))
        ys = [y for y in s["y"] if y is not None]
        if ys:
            positive = positive and min(ys) > 0.0
            spread = max(spread, (max(ys) / min(ys)) if min(ys) > 0 else 1.0)
    if positive and spread > 50.0:
        ax.set_yscale("log")
    ax.set_xlabel(str(report.get("x_label", "index")))
    ax.set_ylabel("value")
    ax.set_title(str(report.get("experiment", "report")))
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    target = out_dir / f"{report.get('experiment', 'report')}.png"
    fig.savefig(target)
    plt.close(fig)
    return [target]
