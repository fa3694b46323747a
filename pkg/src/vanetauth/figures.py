"""Figure rendering for reports and transcripts.

Written next to the delimited outputs when the CLI gets ``--figure-dir``.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .report import MatrixReport
from .sim import Transcript, transcript_lines
from .wire import decode_message, frame_label

_SUCCESS_COLOR = "#c0392b"   # adversary wins
_DEFEATED_COLOR = "#27ae60"  # attack defeated / nothing leaked


def render_matrix_figure(report: MatrixReport, path: str) -> str:
    """Mode x strategy grid, red where the adversary succeeded."""
    modes, strategies = report.modes, report.strategies
    grid = np.zeros((len(modes), len(strategies)))
    for i, mode in enumerate(modes):
        for j, strategy in enumerate(strategies):
            grid[i, j] = 1.0 if report.cells[(mode, strategy)].adversary_success else 0.0

    fig, ax = plt.subplots(figsize=(1.6 * len(strategies) + 2, 0.6 * len(modes) + 1.6))
    ax.imshow(grid, cmap=matplotlib.colors.ListedColormap([_DEFEATED_COLOR, _SUCCESS_COLOR]),
              vmin=0, vmax=1, aspect="auto")
    ax.set_xticks(range(len(strategies)), strategies, rotation=20, ha="right")
    ax.set_yticks(range(len(modes)), modes)
    for i in range(len(modes)):
        for j in range(len(strategies)):
            cell = report.cells[(modes[i], strategies[j])]
            label = "win" if cell.adversary_success else "defeated"
            ax.text(j, i, label, ha="center", va="center", color="white", fontsize=8)
    ax.set_title(f"adversary outcomes (base seed {report.base_seed}, {report.suite})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_rounds_figure(report: MatrixReport, path: str) -> str:
    """Handshake frame counts per mode, from the passive cells."""
    strategy = "passive" if "passive" in report.strategies else report.strategies[0]
    modes = [m for m in report.modes if (m, strategy) in report.cells]
    counts = [report.cells[(m, strategy)].frame_count for m in modes]

    fig, ax = plt.subplots(figsize=(1.1 * len(modes) + 2, 3.2))
    ax.bar(range(len(modes)), counts, color="#2c3e50")
    ax.set_xticks(range(len(modes)), modes, rotation=20, ha="right")
    ax.set_ylabel("frames before first payload")
    ax.set_title(f"handshake length per mode ({strategy} runs)")
    for i, count in enumerate(counts):
        ax.text(i, count + 0.05, str(count), ha="center", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_transcript_figure(transcript: Transcript, path: str) -> str:
    """Message-sequence chart: one lane per vehicle, one arrow per frame."""
    parties: list[str] = []
    for entry in transcript.entries:
        for pid in (entry.src, entry.dst):
            if pid not in parties:
                parties.append(pid)
    lane = {pid: i for i, pid in enumerate(parties)}

    fig, ax = plt.subplots(figsize=(8, 0.45 * len(transcript.entries) + 1.5))
    for pid, x in lane.items():
        ax.axvline(x, color="#bdc3c7", linewidth=1)
        ax.text(x, -0.8, pid, ha="center", fontsize=9, fontweight="bold")
    for row, entry in enumerate(transcript.entries):
        y = row
        x0, x1 = lane[entry.src], lane[entry.dst]
        color = "#e67e22" if entry.intercepted else "#2c3e50"
        style = "--" if entry.intercepted else "-"
        ax.annotate("", xy=(x1, y), xytext=(x0, y),
                    arrowprops=dict(arrowstyle="->", color=color, linestyle=style))
        tag = frame_label(decode_message(entry.frame_bytes))
        ax.text((x0 + x1) / 2, y - 0.3, f"{entry.tick}: {tag}", ha="center", fontsize=7,
                color=color)
    ax.set_ylim(len(transcript.entries), -1.5)
    ax.set_xlim(-0.5, len(parties) - 0.5)
    ax.axis("off")
    ax.set_title(transcript.scenario_id, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_transcript_file(transcript: Transcript, path: str, verbose: bool = True) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(transcript_lines(transcript, verbose=verbose)) + "\n")
    return path
