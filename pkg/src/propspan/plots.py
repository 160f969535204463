"""Report figures written next to the delimited / JSON outputs."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def technique_bars(
    values: Mapping[str, float], path: str | Path, ylabel: str, title: str = "", ylim: tuple | None = None
) -> Path:
    with plt.rc_context(STYLE):
        names = list(values)
        fig, ax = plt.subplots(figsize=(max(4.0, 0.45 * len(names) + 1.5), 3.2))
        ax.bar(range(len(names)), [values[n] for n in names], color="#4c72b0")
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels([n.replace("_", " ") for n in names], rotation=45, ha="right")
        ax.set_ylabel(ylabel)
        if ylim:
            ax.set_ylim(*ylim)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def training_curves(runs: Mapping[int, Sequence], path: str | Path) -> Path:
    """Loss (left) and train F1 (right) per epoch, one line style per seed."""
    with plt.rc_context(STYLE):
        fig, (ax_loss, ax_f1) = plt.subplots(1, 2, figsize=(8.0, 3.0))
        for i, (seed, log) in enumerate(runs.items()):
            epochs = [e.epoch for e in log]
            first = i == 0
            ax_loss.plot(epochs, [e.total_loss for e in log], color="k", lw=1, label="total" if first else None)
            ax_loss.plot(epochs, [e.sentence_loss for e in log], color="#4c72b0", lw=0.8, ls="--",
                         label="sentence" if first else None)
            ax_loss.plot(epochs, [e.token_loss for e in log], color="#dd8452", lw=0.8, ls=":",
                         label="token" if first else None)
            ax_f1.plot(epochs, [e.slc_f1 for e in log], color="#4c72b0", lw=1, label="SLC" if first else None)
            ax_f1.plot(epochs, [e.flc_f1 for e in log], color="#dd8452", lw=1, label="FLC" if first else None)
        ax_loss.set_yscale("log")
        ax_loss.set_xlabel("epoch")
        ax_loss.set_ylabel("loss")
        ax_loss.legend()
        ax_f1.set_xlabel("epoch")
        ax_f1.set_ylabel("train F1")
        ax_f1.set_ylim(0, 1.02)
        ax_f1.legend(loc="lower right")
        fig.suptitle(f"{len(runs)} seed(s): " + ", ".join(str(s) for s in runs), fontsize=9)
        return _save(fig, path)
