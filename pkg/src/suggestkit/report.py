"""Figure rendering for pipeline outputs.

Reads the delimited files the CLI emits and renders matplotlib figures next
to them: a reward-comparison chart (estimated vs actually achieved reward per
policy) and the estimate-vs-M sweep chart.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_reward_comparison(summary_json: str | Path, out_png: str | Path) -> Path:
    """Bar chart of clipped estimate vs true reward for reference and fitted."""
    data = json.loads(Path(summary_json).read_text(encoding="utf-8"))
    labels = [row["policy"] for row in data["policies"]]
    est = [row["estimate"] for row in data["policies"]]
    true = [row["true_reward"] for row in data["policies"]]
    err = [1.96 * row.get("true_se", 0.0) for row in data["policies"]]
    x = range(len(labels))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    width = 0.38
    ax.bar([i - width / 2 for i in x], est, width, label="clipped estimate")
    ax.bar([i + width / 2 for i in x], true, width, yerr=err, capsize=3, label="true reward")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_ylabel("expected accepted words / location")
    ax.legend(frameon=False)
    fig.tight_layout()
    out_png = Path(out_png)
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png


def plot_m_sweep(summary_csv: str | Path, out_png: str | Path) -> Path:
    """Held-out estimate against clip level M, one line per model."""
    rows = []
    with open(summary_csv, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append(row)
    models = sorted({r["model"] for r in rows})
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for model in models:
        pts = sorted(
            ((float(r["m"]), float(r["mean"]), float(r["std"])) for r in rows if r["model"] == model)
        )
        ms = [p[0] for p in pts]
        ax.errorbar(ms, [p[1] for p in pts], yerr=[p[2] for p in pts], marker="o", capsize=3, label=model)
    ax.set_xscale("log")
    ax.set_xlabel("clip level M")
    ax.set_ylabel("held-out estimated reward")
    ax.legend(frameon=False)
    fig.tight_layout()
    out_png = Path(out_png)
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png
