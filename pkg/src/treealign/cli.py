"""CLI interface using Typer."""

import json
import logging
import math
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from treealign.align import alignment_to_json, corpus_struct_iou, explain
from treealign.artifacts import ambiguity_table, eval_table, sweep_table, write_markdown
from treealign.config import EvalConfig, PerturbConfig, load_config
from treealign.experiments import ambiguity_study, perturbation_sweep, synthetic_corpus
from treealign.ingest import (
    load_corpus,
    read_boundaries,
    read_jsonl,
    read_time_trees,
    read_trees,
    read_word_spans,
    report_payload,
    write_boundaries,
    write_jsonl,
    write_report,
    write_time_trees,
)
from treealign.parseval import extract_brackets, score_corpora
from treealign.perturb import PerturbSpec, perturb_delete, perturb_insert, perturb_noise, perturb_tree_noise, utterance_rng
from treealign.segeval import SpanSet, corpus_boundary_prf, mbr_select, segment_miou
from treealign.stats import bootstrap_ci, bucket_correlation
from treealign.tree import validate
from treealign.treebank import read_bracketed_file

app = typer.Typer(help="Struct-IoU: structure-aware evaluation of constituency trees over segments")
console = Console()
err_console = Console(stderr=True)

logger = logging.getLogger("treealign")


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging on stderr"),
):
    """Score relaxed segment trees, parses and word segmentations."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


@contextmanager
def data_errors():
    """Data and I/O problems exit 1 with a diagnostic on stderr."""
    try:
        yield
    except (ValueError, OSError) as e:
        err_console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(1)


def emit(payload: Any, as_json: bool, out: Optional[Path], render: Callable[[], None]) -> None:
    """JSON to --out when given, JSON or a human rendering to stdout."""
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as f:
            json.dump(payload, f, indent=2)
    if as_json:
        typer.echo(json.dumps(payload))
    elif out is None:
        render()
    else:
        console.print(f"[green]✓ Written to {out}[/green]")


def _config(config_path: Optional[Path], **overrides) -> EvalConfig:
    return load_config(config_path).with_overrides(**overrides)


def _metric_table(title: str, values: dict) -> Table:
    table = Table(title=title)
    table.add_column("Metric")
    table.add_column("Value", justify="right")
    for name, value in values.items():
        table.add_row(name, f"{value:.4f}" if isinstance(value, float) else str(value))
    return table


@app.command("eval")
def eval_(
    gold: Path = typer.Option(..., "--gold", help="Gold trees (time-tree JSONL or bracketed)"),
    pred: Path = typer.Option(..., "--pred", help="Predicted trees, same format as --gold"),
    fmt: str = typer.Option("json", "--format", help="json | bracketed"),
    gold_boundaries: Optional[Path] = typer.Option(None, "--gold-boundaries", help="Word boundaries for bracketed gold trees"),
    pred_boundaries: Optional[Path] = typer.Option(None, "--pred-boundaries", help="Word boundaries for bracketed predictions"),
    labeled: Optional[bool] = typer.Option(None, "--labeled/--unlabeled", help="Only align same-label nodes"),
    include_preterminals: Optional[bool] = typer.Option(None, "--include-preterminals/--exclude-preterminals"),
    corpus: bool = typer.Option(False, "--corpus", help="Print the corpus summary only"),
    per_sentence: bool = typer.Option(False, "--per-sentence", help="Also list sentence scores"),
    unit: Optional[str] = typer.Option(None, "--unit", help="word | char projection for bracketed input"),
    jobs: Optional[int] = typer.Option(None, "--jobs", help="Worker processes"),
    skip_invalid: Optional[bool] = typer.Option(None, "--skip-invalid", help="Drop invalid pairs with a warning"),
    alignments: Optional[Path] = typer.Option(None, "--alignments", help="Write per-pair alignments as JSONL"),
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Evaluation preset YAML"),
    as_json: bool = typer.Option(False, "--json", help="Machine-readable JSON on stdout"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the report JSON here"),
    markdown: Optional[Path] = typer.Option(None, "--markdown", help="Write a markdown table here"),
):
    """Struct-IoU between gold and predicted trees."""
    with data_errors():
        config = _config(
            config_path,
            label_mode=None if labeled is None else ("exact_label" if labeled else "unlabeled"),
            include_preterminals=include_preterminals,
            unit=unit,
            jobs=jobs,
            skip_invalid=skip_invalid,
        )
        pairs = load_corpus(gold, pred, fmt, gold_boundaries, pred_boundaries, config)
        report = corpus_struct_iou(
            [(p.gold, p.pred) for p in pairs],
            config.label_mode,
            config.include_preterminals,
            ids=[p.id for p in pairs],
            jobs=config.jobs,
        )
        report.sentence_mean_ci = bootstrap_ci(
            [s.score for s in report.sentences],
            config.bootstrap_resamples,
            config.ci_alpha,
            config.seed,
        )
        if out is not None:
            write_report(report, out, config)
        if alignments is not None:
            records = []
            for p in pairs:
                t1, t2, alignment, score = explain(p.gold, p.pred, config.label_mode, config.include_preterminals)
                records.append({"id": p.id, **alignment_to_json(t1, t2, alignment, score)})
            write_jsonl(alignments, records)
        write_markdown(eval_table(report), markdown)

    if as_json:
        typer.echo(json.dumps(report_payload(report, config)))
        return

    summary = {"corpus": report.corpus, "sentence_mean": report.sentence_mean, "sentences": report.n_sentences}
    if report.sentence_mean_ci is not None:
        summary["sentence_mean_ci"] = f"[{report.sentence_mean_ci[1]:.4f}, {report.sentence_mean_ci[2]:.4f}]"
    console.print(_metric_table(f"Struct-IoU ({config.label_mode})", summary))
    if per_sentence and not corpus:
        table = Table(title="Sentences")
        for column in ("Id", "Score", "n1", "n2"):
            table.add_column(column)
        for s in report.sentences:
            table.add_row(s.id, f"{s.score:.4f}", str(s.n1), str(s.n2))
        console.print(table)


@app.command()
def parseval(
    gold: Path = typer.Option(..., "--gold", help="Gold bracketed trees, one per line"),
    pred: Path = typer.Option(..., "--pred", help="Predicted bracketed trees, one per line"),
    unlabeled: bool = typer.Option(False, "--unlabeled", help="Ignore constituent labels"),
    include_preterminals: Optional[bool] = typer.Option(None, "--include-preterminals/--exclude-preterminals"),
    ignore_punct: Optional[bool] = typer.Option(None, "--ignore-punct", help="Delete punctuation preterminals first"),
    macro: bool = typer.Option(False, "--micro/--macro", help="Pooled bracket scores, or the sentence-mean F1"),
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Evaluation preset YAML"),
    as_json: bool = typer.Option(False, "--json", help="Machine-readable JSON on stdout"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the scores as JSON here"),
):
    """Bracket precision, recall and F1 (micro-averaged by default)."""
    with data_errors():
        config = _config(
            config_path,
            labeled_parseval=False if unlabeled else None,
            parseval_include_preterminals=include_preterminals,
            ignore_punct=ignore_punct,
        )
        options = dict(
            labeled=config.labeled_parseval,
            include_preterminals=config.parseval_include_preterminals,
            ignore_punct=config.ignore_punct,
            punct_labels=config.punct_labels,
            strip_function_tags=config.strip_function_tags,
            unwrap_empty_root=config.unwrap_empty_root,
        )
        result = score_corpora(
            [extract_brackets(line, **options) for line in read_bracketed_file(gold)],
            [extract_brackets(line, **options) for line in read_bracketed_file(pred)],
        )
    payload = result.micro.model_dump()
    payload["macro_f1"] = result.macro_f1
    payload["config"] = config.to_dict()
    shown = {"macro_f1": result.macro_f1} if macro else result.micro.model_dump()
    emit(payload, as_json, out, lambda: console.print(_metric_table("ParsEval", shown)))


@app.command()
def segeval(
    ref: Path = typer.Option(..., "--ref", help="Reference word spans (JSONL or 3-column text)"),
    hyp: Path = typer.Option(..., "--hyp", help="Hypothesised word spans, same format as --ref"),
    tolerance: Optional[float] = typer.Option(None, "--tolerance", help="Boundary tolerance in seconds"),
    miou: bool = typer.Option(False, "--miou", help="Matching-based mean IoU instead of boundary F1"),
    lenient: bool = typer.Option(False, "--lenient", help="mIoU over matched spans only"),
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Evaluation preset YAML"),
    as_json: bool = typer.Option(False, "--json", help="Machine-readable JSON on stdout"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the scores as JSON here"),
):
    """Word segmentation scores: boundary F1 with tolerance, or mIoU."""
    with data_errors():
        config = _config(config_path, tolerance=tolerance, miou_strict=False if lenient else None)
        # silences stay in place: span metrics score the files as written
        refs = [SpanSet.from_word_spans(spans) for spans in read_word_spans(ref)]
        hyps = [SpanSet.from_word_spans(spans) for spans in read_word_spans(hyp)]
        if miou:
            if len(refs) != len(hyps):
                raise ValueError(f"{len(refs)} reference utterances but {len(hyps)} hypotheses")
            values = [segment_miou(r, h, config.miou_strict) for r, h in zip(refs, hyps)]
            payload = {"miou": math.fsum(values) / len(values), "utterances": len(values), "strict": config.miou_strict}
        else:
            payload = corpus_boundary_prf(refs, hyps, config.tolerance).model_dump()
            payload["tolerance"] = config.tolerance
    emit(payload, as_json, out, lambda: console.print(_metric_table("Segmentation", payload)))


@app.command()
def project(
    trees: Path = typer.Option(..., "--trees", help="Bracketed trees, one per line"),
    boundaries: Optional[Path] = typer.Option(None, "--boundaries", help="Word boundaries (JSONL or 3-column text)"),
    unit: str = typer.Option("word", "--unit", help="word | char, used without --boundaries"),
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Evaluation preset YAML"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write time-tree JSONL here"),
):
    """Project bracketed parses onto time or unit coordinates."""
    with data_errors():
        config = _config(config_path, unit=unit)
        projected = [tree for _, tree in read_trees(trees, "bracketed", boundaries, config)]
        if out is not None:
            write_time_trees(out, projected)
            console.print(f"[green]✓ Projected {len(projected)} trees to {out}[/green]")
            return
    for tree in projected:
        typer.echo(json.dumps(tree.to_json()))


@app.command()
def perturb(
    kind: str = typer.Option(..., "--kind", help="noise | insert | delete"),
    delta: float = typer.Option(..., "--delta", help="Perturbation level in [0, 1]"),
    seed: int = typer.Option(0, "--seed", help="Corpus seed"),
    boundaries: Optional[Path] = typer.Option(None, "--boundaries", help="Word boundaries to perturb (noise, delete)"),
    trees: Optional[Path] = typer.Option(None, "--trees", help="Time-tree JSONL to perturb (noise, insert)"),
    out: Path = typer.Option(..., "--out", help="Perturbed output JSONL"),
    manifest: Optional[Path] = typer.Option(None, "--manifest", help="Write kind/delta/seed per utterance here"),
):
    """Apply a seeded boundary perturbation to every utterance."""
    with data_errors():
        spec = PerturbSpec(kind=kind, delta=delta, seed=seed)
        if (boundaries is None) == (trees is None):
            raise ValueError("give exactly one of --boundaries or --trees")
        if trees is not None:
            if spec.kind == "delete":
                raise ValueError("delete works on --boundaries; re-parse the merged words for trees")
            step = perturb_tree_noise if spec.kind == "noise" else perturb_insert
            records = read_time_trees(trees)
            results = [step(t, spec.delta, utterance_rng(spec.seed, k)) for k, (_, t) in enumerate(records)]
            ids = [record_id if record_id is not None else str(k) for k, (record_id, _) in enumerate(records)]
            write_time_trees(out, results, ids if any(r is not None for r, _ in records) else None)
        else:
            if spec.kind == "insert":
                raise ValueError("insert splits tree leaves; pass --trees")
            step = perturb_noise if spec.kind == "noise" else perturb_delete
            sequences = read_boundaries(boundaries)
            results = [step(b, spec.delta, utterance_rng(spec.seed, k)) for k, b in enumerate(sequences)]
            write_boundaries(out, results)
        if manifest is not None:
            write_jsonl(manifest, ({"index": k, **spec.model_dump()} for k in range(len(results))))
    console.print(f"[green]✓ Perturbed {len(results)} utterances ({spec.kind}, δ={spec.delta}) to {out}[/green]")


def _candidate(raw: Any, loss: str):
    if loss == "treef1":
        return raw
    spans = [(s["start"], s["end"]) if isinstance(s, dict) else tuple(s) for s in raw]
    return SpanSet.of(spans)


@app.command()
def mbr(
    candidates: Path = typer.Option(..., "--candidates", help="JSONL, one candidate list per utterance"),
    loss: str = typer.Option("miou", "--loss", help="miou | treef1"),
    labeled: bool = typer.Option(False, "--labeled", help="Labeled tree F1 for --loss treef1"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write selected indices as JSONL"),
):
    """Minimum Bayes risk selection among candidate outputs."""
    with data_errors():
        if loss not in ("miou", "treef1"):
            raise ValueError(f"unknown loss {loss!r}, expected miou or treef1")
        selections = []
        for lineno, data in read_jsonl(candidates):
            entries = data.get("candidates") if isinstance(data, dict) else data
            if not isinstance(entries, list):
                raise ValueError(f"{candidates}:{lineno}: expected a list of candidates")
            chosen = mbr_select([_candidate(c, loss) for c in entries], loss, labeled=labeled)
            record = {"index": len(selections), "selected": chosen}
            if isinstance(data, dict) and "id" in data:
                record["id"] = data["id"]
            selections.append(record)
        if out is not None:
            write_jsonl(out, selections)
            console.print(f"[green]✓ Selected {len(selections)} outputs to {out}[/green]")
            return
    for record in selections:
        typer.echo(json.dumps(record))


@app.command("validate")
def validate_(
    trees: Path = typer.Option(..., "--trees", help="Time-tree JSONL"),
    as_json: bool = typer.Option(False, "--json", help="Machine-readable JSON on stdout"),
):
    """Check every tree against the relaxed segment tree conditions."""
    with data_errors():
        records = read_time_trees(trees)
    problems = []
    for k, (record_id, tree) in enumerate(records):
        for violation in validate(tree):
            problems.append({"record": k + 1, "id": record_id, **violation.model_dump(mode="json")})
    if as_json:
        typer.echo(json.dumps({"trees": len(records), "violations": problems}))
    elif problems:
        table = Table(title="Violations")
        for column in ("Record", "Path", "Label", "Condition", "Message"):
            table.add_column(column)
        for p in problems:
            table.add_row(str(p["record"]), str(p["path"]), p["label"], p["condition"], p["message"])
        err_console.print(table)
    else:
        console.print(f"[green]✓ {len(records)} trees valid[/green]")
    if problems:
        raise typer.Exit(1)


@app.command()
def sweep(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Perturbation preset YAML"),
    kind: Optional[str] = typer.Option(None, "--kind", help="noise | insert"),
    trees: Optional[Path] = typer.Option(None, "--trees", help="Time-tree JSONL (default: synthetic utterances)"),
    n_utterances: int = typer.Option(100, "--n-utterances", help="Synthetic corpus size"),
    as_json: bool = typer.Option(False, "--json", help="Machine-readable JSON on stdout"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the sweep JSON here"),
    markdown: Optional[Path] = typer.Option(None, "--markdown", help="Write a markdown table here"),
):
    """Struct-IoU of perturbed copies of each tree across perturbation levels."""
    with data_errors():
        config = PerturbConfig.from_yaml(config_path) if config_path else PerturbConfig()
        if kind is not None:
            config = config.model_validate({**config.model_dump(), "kind": kind})
        if trees is not None:
            pairs = [(t, t) for _, t in read_time_trees(trees)]
        else:
            pairs = synthetic_corpus(n_utterances, seed=config.seed)
        points = perturbation_sweep(pairs, config.kind, config.deltas, config.n_seeds, config.seed)
        write_markdown(sweep_table(config.kind, points), markdown)
    payload = {"config": config.model_dump(), "points": [p.model_dump() for p in points]}

    def render():
        table = Table(title=f"Perturbation sweep ({config.kind})")
        table.add_column("δ")
        table.add_column("Mean", justify="right")
        table.add_column("Std", justify="right")
        for p in points:
            table.add_row(f"{p.delta:g}", f"{p.mean:.4f}", f"{p.std:.4f}")
        console.print(table)

    emit(payload, as_json, out, render)


@app.command()
def ambiguity(
    n: list[int] = typer.Option([2], "--n", help="Number of prepositional phrases (repeatable)"),
    n_random: int = typer.Option(100, "--n-random", help="Random binary trees per n"),
    seed: int = typer.Option(0, "--seed", help="Random seed"),
    as_json: bool = typer.Option(False, "--json", help="Machine-readable JSON on stdout"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the results JSON here"),
    markdown: Optional[Path] = typer.Option(None, "--markdown", help="Write a markdown table here"),
):
    """ParsEval F1 and Struct-IoU on PP-attachment ambiguity."""
    with data_errors():
        results = [ambiguity_study(k, n_random, seed) for k in n]
        write_markdown(ambiguity_table(results), markdown)
    payload = [r.model_dump() for r in results]

    def render():
        table = Table(title="Syntactic ambiguity")
        for column in ("n", "Plausible F1", "Plausible Struct-IoU", "Random F1", "Random Struct-IoU"):
            table.add_column(column, justify="right")
        for r in results:
            table.add_row(
                str(r.n), f"{r.plausible_f1:.3f}", f"{r.plausible_struct_iou:.3f}",
                f"{r.random_f1:.3f}", f"{r.random_struct_iou:.3f}",
            )
        console.print(table)

    emit(payload, as_json, out, render)


@app.command()
def compare(
    gold: Path = typer.Option(..., "--gold", help="Gold bracketed trees"),
    pred: Path = typer.Option(..., "--pred", help="Predicted bracketed trees"),
    bucket_size: int = typer.Option(10, "--bucket-size", help="Sentences averaged per point"),
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Evaluation preset YAML"),
    as_json: bool = typer.Option(False, "--json", help="Machine-readable JSON on stdout"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the correlation JSON here"),
):
    """Rank correlation between sentence Struct-IoU and sentence ParsEval F1."""
    with data_errors():
        config = load_config(config_path).with_overrides(skip_invalid=False)
        pairs = load_corpus(gold, pred, "bracketed", config=config)
        report = corpus_struct_iou([(p.gold, p.pred) for p in pairs], config.label_mode, config.include_preterminals)
        options = dict(
            labeled=config.labeled_parseval,
            include_preterminals=config.parseval_include_preterminals,
            strip_function_tags=config.strip_function_tags,
            unwrap_empty_root=config.unwrap_empty_root,
        )
        brackets = score_corpora(
            [extract_brackets(line, **options) for line in read_bracketed_file(gold)],
            [extract_brackets(line, **options) for line in read_bracketed_file(pred)],
        )
        correlation = bucket_correlation(
            [s.score for s in report.sentences],
            [s.f1 for s in brackets.sentences],
            bucket_size,
            config.seed,
        )
    payload = {"struct_iou": report.corpus, "parseval_f1": brackets.micro.f1, **correlation}
    emit(payload, as_json, out, lambda: console.print(_metric_table("Struct-IoU vs ParsEval", payload)))


def run(argv: Optional[list[str]] = None) -> int:
    """Invoke the app and return its exit code instead of exiting."""
    try:
        rv = app(args=argv, standalone_mode=False)
    except Exception as e:
        # usage errors come from whichever click copy typer ships; all carry exit_code
        exit_code = getattr(e, "exit_code", None)
        if not isinstance(exit_code, int):
            raise
        show = getattr(e, "show", None)
        if callable(show):
            show()
        return exit_code
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    app()
