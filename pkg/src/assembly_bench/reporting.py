"""Report rendering: text tables plus JSON, CSV, and PNG files.

The evaluation table follows the usual benchmark layout, one column per
op under each cue family and a trailing average. Datasets with
non-standard buckets (compositional runs) fall back to a flat listing.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import TASK_LABELS, EvalReport, RouteResult

_OP_SHORT = {"insert": "Ins.", "remove": "Rem.", "replace": "Repl.", "swap": "Swap"}
_CUE_COLORS = {"positional": "#4c72b0", "semantic": "#c44e52"}

EVAL_REPORT_FILES = ("report.json", "report.csv", "report.png")
ROUTING_REPORT_FILES = ("routing.json", "routing.csv", "routing.png")


def _pct(fraction: float) -> str:
    return f"{100.0 * fraction:.1f}"


def format_report_table(report: EvalReport) -> str:
    """Render an EvalReport as an aligned text table."""
    if set(report.per_task) <= set(TASK_LABELS):
        return _standard_table(report)
    return _flat_table(report)


def _standard_table(report: EvalReport) -> str:
    ops = ("insert", "remove", "replace", "swap")
    head = f"{'':10}"
    for cue in ("positional", "semantic"):
        head += "".join(f"{_OP_SHORT[op]:>8}" for op in ops)
    head += f"{'Avg.':>8}"
    group = f"{'':10}{'Positional cues':^32}{'Semantic cues':^32}"

    acc_row = f"{'accuracy':10}"
    n_row = f"{'samples':10}"
    for cue in ("positional", "semantic"):
        for op in ops:
            bucket = f"{op}/{cue}"
            if bucket in report.per_task:
                acc_row += f"{_pct(report.per_task[bucket]):>8}"
                n_row += f"{report.counts['per_task'][bucket]['total']:>8}"
            else:
                acc_row += f"{'-':>8}"
                n_row += f"{'-':>8}"
    acc_row += f"{_pct(report.overall):>8}"
    n_row += f"{report.counts['total']:>8}"
    return "\n".join([group, head, acc_row, n_row])


def _flat_table(report: EvalReport) -> str:
    width = max([len(b) for b in report.per_task] + [len("overall")]) + 2
    lines = [f"{'bucket':<{width}}{'accuracy':>10}{'correct':>10}{'total':>8}"]
    for bucket, fraction in report.per_task.items():
        tally = report.counts["per_task"][bucket]
        lines.append(
            f"{bucket:<{width}}{_pct(fraction):>10}{tally['correct']:>10}{tally['total']:>8}"
        )
    lines.append(
        f"{'overall':<{width}}{_pct(report.overall):>10}"
        f"{report.counts['correct']:>10}{report.counts['total']:>8}"
    )
    return "\n".join(lines)


def render_report_figure(report: EvalReport, path: str) -> None:
    """Bar chart of per-bucket accuracy with the overall level marked."""
    labels = list(report.per_task)
    values = [100.0 * report.per_task[b] for b in labels]
    colors = [_CUE_COLORS.get(b.rsplit("/", 1)[-1], "#777777") for b in labels]

    fig, ax = plt.subplots(figsize=(max(6.0, 1.1 * len(labels)), 4.0))
    ax.bar(range(len(labels)), values, color=colors)
    ax.axhline(100.0 * report.overall, color="#333333", linewidth=1.0, linestyle="--")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title(f"overall {_pct(report.overall)}% on {report.counts['total']} samples")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report_files(report: EvalReport, out_dir: str) -> list[str]:
    """Write report.json, report.csv, and report.png under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    json_path, csv_path, png_path = (os.path.join(out_dir, n) for n in EVAL_REPORT_FILES)

    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(asdict(report), handle, indent=2)
        handle.write("\n")

    with open(csv_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["scope", "bucket", "correct", "total", "accuracy"])
        for bucket, tally in report.counts["per_task"].items():
            writer.writerow(
                ["task", bucket, tally["correct"], tally["total"], report.per_task[bucket]]
            )
        for cue, tally in report.counts["per_cue"].items():
            writer.writerow(["cue", cue, tally["correct"], tally["total"], report.per_cue[cue]])
        writer.writerow(
            ["overall", "", report.counts["correct"], report.counts["total"], report.overall]
        )

    render_report_figure(report, png_path)
    return [json_path, csv_path, png_path]


# --- routing ------------------------------------------------------------------


def format_routing_table(closed: RouteResult, simulated: RouteResult | None = None) -> str:
    """Aligned per-task table for closed-form and simulated composites."""
    width = max(len(label) for label in TASK_LABELS) + 2
    head = f"{'task':<{width}}{'closed':>8}"
    if simulated is not None:
        head += f"{'simulated':>11}"
    lines = [head]
    for index, label in enumerate(TASK_LABELS):
        row = f"{label:<{width}}{_pct(closed.per_task[index]):>8}"
        if simulated is not None:
            row += f"{_pct(simulated.per_task[index]):>11}"
        lines.append(row)
    row = f"{'average':<{width}}{_pct(closed.average):>8}"
    if simulated is not None:
        row += f"{_pct(simulated.average):>11}"
    lines.append(row)
    return "\n".join(lines)


def render_routing_figure(closed: RouteResult, simulated: RouteResult | None, path: str) -> None:
    """Grouped bars comparing closed-form and simulated per-task accuracy."""
    positions = range(len(TASK_LABELS))
    fig, ax = plt.subplots(figsize=(9.0, 4.0))
    if simulated is None:
        ax.bar(positions, [100.0 * v for v in closed.per_task], color="#4c72b0")
    else:
        ax.bar(
            [p - 0.2 for p in positions],
            [100.0 * v for v in closed.per_task],
            width=0.4,
            color="#4c72b0",
            label="closed form",
        )
        ax.bar(
            [p + 0.2 for p in positions],
            [100.0 * v for v in simulated.per_task],
            width=0.4,
            color="#dd8452",
            label="simulated",
        )
        ax.legend(fontsize=8)
    ax.axhline(100.0 * closed.average, color="#333333", linewidth=1.0, linestyle="--")
    ax.set_xticks(list(positions))
    ax.set_xticklabels(TASK_LABELS, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("composite accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title(f"routed ensemble, average {_pct(closed.average)}%")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_routing_files(
    closed: RouteResult, simulated: RouteResult | None, out_dir: str
) -> list[str]:
    """Write routing.json, routing.csv, and routing.png under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    json_path, csv_path, png_path = (os.path.join(out_dir, n) for n in ROUTING_REPORT_FILES)

    payload = {
        "tasks": list(TASK_LABELS),
        "closed": asdict(closed),
        "simulated": None if simulated is None else asdict(simulated),
    }
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")

    with open(csv_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["task", "closed", "simulated"])
        for index, label in enumerate(TASK_LABELS):
            sim_value = "" if simulated is None else simulated.per_task[index]
            writer.writerow([label, closed.per_task[index], sim_value])
        writer.writerow(
            ["average", closed.average, "" if simulated is None else simulated.average]
        )

    render_routing_figure(closed, simulated, png_path)
    return [json_path, csv_path, png_path]
