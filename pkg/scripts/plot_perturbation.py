#!/usr/bin/env python3
"""Plot Struct-IoU against perturbation level from `treealign sweep --out` files.

Usage: plot_perturbation.py OUTPUT.png SWEEP.json [SWEEP.json ...]
"""

import json
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np


def plot_sweeps(sweep_paths: list[Path], output_path: Path) -> None:
    """One line per sweep file with a ±1 std band over seeds."""
    fig, ax = plt.subplots(figsize=(8, 5))

    for path in sweep_paths:
        with open(path) as f:
            data = json.load(f)
        points = data["points"]
        deltas = np.array([p["delta"] for p in points])
        means = np.array([p["mean"] for p in points])
        stds = np.array([p["std"] for p in points])
        label = data.get("config", {}).get("kind", path.stem).capitalize() + "-δ"
        ax.plot(deltas, means, marker="o", label=label, linewidth=2)
        ax.fill_between(deltas, means - stds, means + stds, alpha=0.2)

    ax.set_xlabel("δ", fontsize=12)
    ax.set_ylabel("Corpus Struct-IoU", fontsize=12)
    ax.set_title("Robustness to word boundary perturbation", fontsize=14, fontweight="bold")
    ax.legend()
    ax.grid(True, alpha=0.3)

    plt.tight_layout()
    plt.savefig(output_path, dpi=300, bbox_inches="tight")
    plt.close()


if __name__ == "__main__":
    if len(sys.argv) < 3:
        print(__doc__)
        sys.exit(2)
    plot_sweeps([Path(p) for p in sys.argv[2:]], Path(sys.argv[1]))
    print(f"✓ Saved {sys.argv[1]}")
