"""Figure rendering for session reports and sweep tables.

Figures are written straight to files next to the delimited output; nothing
is ever displayed interactively.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def save_session_figure(report: dict, path: str | Path) -> Path:
    """Bar chart of round dispositions with the headline statistics."""
    path = Path(path)
    labels = ["conclusive", "inconclusive", "tamper", "lost"]
    counts = [
        report.get("conclusive_count", 0),
        report.get("inconclusive_count", 0),
        report.get("tamper_count", 0),
        report.get("rounds_lost", 0),
    ]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    bars = ax.bar(labels, counts, color=["#2a7fba", "#9fbcd1", "#c0392b", "#7f8c8d"])
    ax.bar_label(bars)
    ax.set_ylabel("rounds")
    qber = report.get("test_qber")
    qber_text = f"{qber:.4f}" if isinstance(qber, float) else "-"
    status = f"aborted ({report.get('abort_reason')})" if report.get("aborted") else "completed"
    ax.set_title(
        f"{report.get('variant', '?')} session, attack {report.get('effective_attack', 'none')}\n"
        f"{status}, test QBER {qber_text}, final key {report.get('final_key_length', 0)} bits"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_sweep_figure(rows: list[dict], axis: str, path: str | Path) -> Path:
    """Detection statistics and key yield against the swept parameter."""
    path = Path(path)
    fig, (ax_err, ax_key) = plt.subplots(2, 1, figsize=(6.5, 6.0), sharex=True)

    values = [row["value"] for row in rows]
    numeric = all(isinstance(v, (int, float)) for v in values)
    x = values if numeric else range(len(values))

    def series(key):
        return [row[key] if row[key] is not None else float("nan") for row in rows]

    ax_err.plot(x, series("mean_test_qber"), "o-", label="mean test QBER")
    ax_err.plot(x, series("mean_tamper_rate"), "s-", label="mean tamper rate")
    ax_err.plot(x, series("abort_rate"), "^--", label="abort rate")
    ax_err.set_ylabel("rate")
    ax_err.legend(loc="best", fontsize=8)

    ax_key.plot(x, series("mean_sifted_length"), "o-", label="mean sifted length")
    ax_key.plot(x, series("mean_final_key_length"), "s-", label="mean final key length")
    ax_key.set_ylabel("bits")
    ax_key.set_xlabel(axis)
    ax_key.legend(loc="best", fontsize=8)

    if not numeric:
        ax_key.set_xticks(list(x))
        ax_key.set_xticklabels([str(v) for v in values], rotation=20, ha="right")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
