"""Report rendering: delimited CSV output with matplotlib figures
written alongside."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _ensure(out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def training_report(history: list[dict], out_dir) -> None:
    """training_history.csv + loss/accuracy curves."""
    out = _ensure(out_dir)
    with open(out / "training_history.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["epoch", "train_loss", "val_accuracy"])
        writer.writeheader()
        writer.writerows(history)
    epochs = [h["epoch"] for h in history]
    fig, ax1 = plt.subplots(figsize=(7, 4))
    ax1.plot(epochs, [h["train_loss"] for h in history], "C0-o", label="train loss")
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("train loss", color="C0")
    ax2 = ax1.twinx()
    ax2.plot(epochs, [h["val_accuracy"] for h in history], "C1-s", label="val turn accuracy")
    ax2.set_ylabel("validation turn accuracy", color="C1")
    fig.tight_layout()
    fig.savefig(out / "training_curve.png", dpi=120)
    plt.close(fig)


def evaluation_report(result: dict, out_dir) -> None:
    """metrics.csv plus a per-dialogue turn-accuracy histogram."""
    out = _ensure(out_dir)
    with open(out / "metrics.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerow(["turn_accuracy", f"{result['turn_accuracy']:.6f}"])
        writer.writerow(["dialogue_accuracy", f"{result['dialogue_accuracy']:.6f}"])
    preds, golds = result["predictions"], result["golds"]
    edges = list(result["boundaries"]) + [len(golds)]
    per_dialogue = [
        sum(preds[i] == golds[i] for i in range(lo, hi)) / max(1, hi - lo)
        for lo, hi in zip(edges[:-1], edges[1:])
    ]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(per_dialogue, bins=20, range=(0, 1), color="C0")
    ax.set_xlabel("per-dialogue turn accuracy")
    ax.set_ylabel("dialogues")
    fig.tight_layout()
    fig.savefig(out / "per_dialogue_accuracy.png", dpi=120)
    plt.close(fig)


def hpo_report(trials: list, out_dir) -> None:
    """trials.csv plus a best-so-far curve."""
    out = _ensure(out_dir)
    with open(out / "trials.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "score", "status", "wall_time"])
        for t in trials:
            writer.writerow([t.number, f"{t.score:.6f}", t.status, f"{t.wall_time:.2f}"])
    best_so_far, best = [], float("-inf")
    for t in trials:
        best = max(best, t.score)
        best_so_far.append(best)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([t.number for t in trials], [t.score for t in trials], "C0o", label="trial score")
    ax.plot([t.number for t in trials], best_so_far, "C1-", label="best so far")
    ax.set_xlabel("trial")
    ax.set_ylabel("validation turn accuracy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "hpo_progress.png", dpi=120)
    plt.close(fig)
