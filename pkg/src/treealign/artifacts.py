"""Generate report artifacts: markdown tables."""

from pathlib import Path
from typing import Optional, Sequence

from treealign.experiments import AmbiguityResult, SweepPoint
from treealign.report import EvalReport


def format_ci(mean: float, ci_low: float, ci_high: float, decimals: int = 3) -> str:
    """Format mean with CI as string."""
    return f"{mean:.{decimals}f} [{ci_low:.{decimals}f}, {ci_high:.{decimals}f}]"


def format_mean_std(mean: float, std: float, decimals: int = 3) -> str:
    return f"{mean:.{decimals}f} ± {std:.{decimals}f}"


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |"]
    lines.append("|" + "|".join(["---"] * len(header)) + "|")
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return lines


def eval_table(report: EvalReport, decimals: int = 4) -> str:
    """Corpus summary followed by per-sentence scores."""
    mean = f"{report.sentence_mean:.{decimals}f}"
    if report.sentence_mean_ci is not None:
        mean = format_ci(*report.sentence_mean_ci, decimals=decimals)
    lines = [f"# Struct-IoU ({report.label_mode})", ""]
    lines += _table(
        ["Corpus", "Sentence mean", "Sentences"],
        [[f"{report.corpus:.{decimals}f}", mean, str(report.n_sentences)]],
    )
    lines += ["", "## Sentences", ""]
    lines += _table(
        ["Id", "Score", "n1", "n2"],
        [[s.id, f"{s.score:.{decimals}f}", str(s.n1), str(s.n2)] for s in report.sentences],
    )
    return "\n".join(lines) + "\n"


def sweep_table(kind: str, points: Sequence[SweepPoint]) -> str:
    lines = [f"# Perturbation sweep: {kind}", ""]
    lines += _table(
        ["δ", "Struct-IoU (mean ± std)", "Seeds"],
        [[f"{p.delta:g}", format_mean_std(p.mean, p.std), str(len(p.per_seed))] for p in points],
    )
    return "\n".join(lines) + "\n"


def ambiguity_table(results: Sequence[AmbiguityResult]) -> str:
    lines = ["# Syntactic ambiguity: N (P N){n}", ""]
    lines += _table(
        ["n", "Plausible F1", "Plausible Struct-IoU", "Random F1", "Random Struct-IoU"],
        [
            [
                str(r.n),
                f"{100 * r.plausible_f1:.1f}",
                f"{100 * r.plausible_struct_iou:.1f}",
                f"{100 * r.random_f1:.1f}",
                f"{100 * r.random_struct_iou:.1f}",
            ]
            for r in results
        ],
    )
    lines.append("\n*Note: unlabeled scores, all nonterminals share one label.*")
    return "\n".join(lines) + "\n"


def write_markdown(text: str, output_path: Optional[Path]) -> None:
    if output_path is None:
        return
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w") as f:
        f.write(text)
