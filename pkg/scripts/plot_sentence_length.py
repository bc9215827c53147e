#!/usr/bin/env python3
"""Plot sentence Struct-IoU against sentence size from a `treealign eval --out` report.

Usage: plot_sentence_length.py REPORT.json OUTPUT.png
"""

import json
import sys
from pathlib import Path

import matplotlib.pyplot as plt


def plot_sentence_length(report_path: Path, output_path: Path) -> None:
    with open(report_path) as f:
        report = json.load(f)

    sizes = [s["n1"] + s["n2"] for s in report["sentences"]]
    scores = [s["score"] for s in report["sentences"]]

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.scatter(sizes, scores, s=10, alpha=0.5)
    ax.axhline(report["corpus"], color="C1", linewidth=2, label=f"corpus {report['corpus']:.3f}")
    ax.axhline(report["sentence_mean"], color="C2", linestyle="--", linewidth=2,
               label=f"sentence mean {report['sentence_mean']:.3f}")

    ax.set_xlabel("Nodes in gold + predicted tree", fontsize=12)
    ax.set_ylabel("Sentence Struct-IoU", fontsize=12)
    ax.set_ylim(-0.05, 1.05)
    ax.legend()
    ax.grid(True, alpha=0.3)

    plt.tight_layout()
    plt.savefig(output_path, dpi=300, bbox_inches="tight")
    plt.close()


if __name__ == "__main__":
    if len(sys.argv) != 3:
        print(__doc__)
        sys.exit(2)
    plot_sentence_length(Path(sys.argv[1]), Path(sys.argv[2]))
    print(f"✓ Saved {sys.argv[2]}")
