"""Reading paired corpora and writing reports."""

import json
import logging
import platform
import sys
from pathlib import Path
from typing import Any, Iterable, Literal, Optional

from pydantic import BaseModel, ValidationError

from treealign import __version__
from treealign.config import EvalConfig, Unit
from treealign.errors import BoundaryError, CorpusError, TreeAlignError, TreeValidationError
from treealign.interval import iou
from treealign.tree import (
    BoundarySequence,
    SegmentTree,
    WordSpan,
    attach_boundaries,
    project_text,
    remove_gaps,
    validate,
)
from treealign.treebank import read_bracketed_file

logger = logging.getLogger(__name__)

TreeFormat = Literal["json", "bracketed"]

ENVELOPE_WARN = 0.10


class CorpusPair(BaseModel):
    id: str
    gold: SegmentTree
    pred: SegmentTree


def read_jsonl(path: Path) -> list[tuple[int, Any]]:
    """(line number, decoded value) for every non-blank line."""
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append((lineno, json.loads(line)))
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {e.msg}") from e
    return records


def write_jsonl(path: Path, records: Iterable[Any]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record) + "\n")


def read_time_trees(path: Path, unit: Unit = "seconds") -> list[tuple[Optional[str], SegmentTree]]:
    """Time-tree JSONL; an optional top-level "id" names the record."""
    trees = []
    for lineno, data in read_jsonl(path):
        if not isinstance(data, dict):
            raise CorpusError(f"{path}:{lineno}: expected a tree object")
        data = dict(data)
        record_id = data.pop("id", None)
        try:
            tree = SegmentTree.from_json(data, unit)
        except ValidationError as e:
            raise CorpusError(f"{path}:{lineno}: {e.errors()[0]['msg']}") from e
        trees.append((None if record_id is None else str(record_id), tree))
    return trees


def write_time_trees(path: Path, trees: Iterable[SegmentTree], ids: Optional[list[str]] = None) -> None:
    records = []
    for k, tree in enumerate(trees):
        record = tree.to_json()
        if ids is not None:
            record = {"id": ids[k], **record}
        records.append(record)
    write_jsonl(path, records)


def _spans_from(entries: list, where: str) -> list[WordSpan]:
    try:
        return [WordSpan.model_validate(entry) for entry in entries]
    except ValidationError as e:
        raise CorpusError(f"{where}: {e.errors()[0]['msg']}") from e


def read_word_spans(path: Path) -> list[list[WordSpan]]:
    """Word spans per utterance exactly as written, silences included.

    ``.jsonl`` files hold one array of {"word", "start", "end"} objects (or
    an object with such an array under "words") per line. Anything else is
    read as three whitespace-separated columns, word start end, with blank
    lines between utterances.
    """
    return [spans for _, spans in _read_utterances(Path(path))]


def _read_utterances(path: Path) -> list[tuple[str, list[WordSpan]]]:
    utterances: list[tuple[str, list[WordSpan]]] = []
    if path.suffix == ".jsonl":
        for lineno, data in read_jsonl(path):
            entries = data.get("words") if isinstance(data, dict) else data
            if not isinstance(entries, list):
                raise CorpusError(f"{path}:{lineno}: expected a list of word spans")
            utterances.append((f"{path}:{lineno}", _spans_from(entries, f"{path}:{lineno}")))
        return utterances

    current: list[WordSpan] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            fields = line.split()
            if not fields:
                if current:
                    utterances.append((f"{path}:{lineno}", current))
                    current = []
                continue
            if len(fields) != 3:
                raise CorpusError(f"{path}:{lineno}: expected 'word start end', got {line.strip()!r}")
            try:
                current.append(WordSpan(word=fields[0], start=float(fields[1]), end=float(fields[2])))
            except ValueError as e:
                raise CorpusError(f"{path}:{lineno}: {e}") from e
    if current:
        utterances.append((f"{path}:end", current))
    return utterances


def read_boundaries(path: Path) -> list[BoundarySequence]:
    """Word boundaries per utterance with inter-word gaps closed.

    Trees and perturbations need gapless boundaries; metrics that accept
    silences read ``read_word_spans`` instead.
    """
    sequences = []
    for where, spans in _read_utterances(Path(path)):
        try:
            sequences.append(remove_gaps(spans))
        except BoundaryError as e:
            raise CorpusError(f"{where}: {e}") from e
    return sequences


def write_boundaries(path: Path, sequences: Iterable[BoundarySequence]) -> None:
    write_jsonl(path, ([span.model_dump() for span in seq.word_spans()] for seq in sequences))


def read_trees(
    path: Path,
    fmt: TreeFormat = "json",
    boundaries: Optional[Path] = None,
    config: Optional[EvalConfig] = None,
) -> list[tuple[Optional[str], SegmentTree]]:
    """Trees of one side of a corpus.

    Bracketed trees are put on the time axis with ``boundaries`` when
    given, otherwise projected onto word or character units.
    """
    config = config or EvalConfig()
    if fmt == "json":
        return read_time_trees(path)
    if fmt != "bracketed":
        raise CorpusError(f"unknown tree format: {fmt}")

    options = {
        "strip_function_tags": config.strip_function_tags,
        "unwrap_empty_root": config.unwrap_empty_root,
    }
    lines = read_bracketed_file(path)
    sequences = read_boundaries(boundaries) if boundaries is not None else None
    if sequences is not None and len(sequences) != len(lines):
        raise CorpusError(
            f"{path} has {len(lines)} trees but {boundaries} has {len(sequences)} utterances"
        )
    trees = []
    for k, line in enumerate(lines):
        try:
            if sequences is None:
                tree = project_text(line, config.unit, **options)
            else:
                tree = attach_boundaries(line, sequences[k], config.case_insensitive, **options)
        except TreeAlignError as e:
            raise CorpusError(f"{path}: tree {k + 1}: {e}") from e
        trees.append((None, tree))
    return trees


def pair_records(
    gold: list[tuple[Optional[str], SegmentTree]],
    pred: list[tuple[Optional[str], SegmentTree]],
) -> list[tuple[str, SegmentTree, SegmentTree]]:
    """Join by id when every record carries one, else by position."""
    if gold and pred and all(i is not None for i, _ in gold + pred):
        pred_by_id: dict[str, SegmentTree] = {}
        for record_id, tree in pred:
            if record_id in pred_by_id:
                raise CorpusError(f"duplicate prediction id {record_id!r}")
            pred_by_id[record_id] = tree
        seen = set()
        joined = []
        for record_id, tree in gold:
            if record_id in seen:
                raise CorpusError(f"duplicate gold id {record_id!r}")
            seen.add(record_id)
            if record_id not in pred_by_id:
                raise CorpusError(f"gold id {record_id!r} has no prediction")
            joined.append((record_id, tree, pred_by_id[record_id]))
        extra = set(pred_by_id) - seen
        if extra:
            raise CorpusError(f"{len(extra)} predictions have no gold tree, e.g. {sorted(extra)[0]!r}")
        return joined

    if len(gold) != len(pred):
        raise CorpusError(f"gold has {len(gold)} records but prediction has {len(pred)}")
    return [
        (gold_id if gold_id is not None else str(k), g, p)
        for k, ((gold_id, g), (_, p)) in enumerate(zip(gold, pred))
    ]


def load_corpus(
    gold_path: Path,
    pred_path: Path,
    fmt: TreeFormat = "json",
    gold_boundaries: Optional[Path] = None,
    pred_boundaries: Optional[Path] = None,
    config: Optional[EvalConfig] = None,
) -> list[CorpusPair]:
    """Paired gold/predicted trees, each validated on load.

    Invalid trees raise ``TreeValidationError`` naming the record, unless
    ``config.skip_invalid`` is set, in which case the pair is dropped with a
    warning.
    """
    config = config or EvalConfig()
    gold = read_trees(gold_path, fmt, gold_boundaries, config)
    pred = read_trees(pred_path, fmt, pred_boundaries, config)
    pairs = []
    for k, (record_id, g, p) in enumerate(pair_records(gold, pred)):
        problems = [
            (side, violations)
            for side, violations in (("gold", validate(g)), ("pred", validate(p)))
            if violations
        ]
        if problems:
            side, violations = problems[0]
            context = f"{side} record {k + 1} (id {record_id})"
            if not config.skip_invalid:
                raise TreeValidationError(violations, context)
            logger.warning("skipping %s: %s", context, violations[0])
            continue
        if 1.0 - iou(g.interval, p.interval) > ENVELOPE_WARN:
            logger.warning(
                "record %s: gold covers %s but prediction covers %s",
                record_id, g.interval, p.interval,
            )
        pairs.append(CorpusPair(id=record_id, gold=g, pred=p))
    if not pairs:
        raise CorpusError("nothing to score: no valid sentence pairs")
    return pairs


def get_python_env_info() -> dict:
    return {
        "python_version": sys.version,
        "platform": platform.platform(),
        "architecture": platform.machine(),
    }


def report_payload(report: BaseModel, config: Optional[EvalConfig] = None) -> dict:
    """Report fields plus tool version, config echo and environment."""
    payload = report.model_dump(mode="json")
    payload["version"] = __version__
    payload["config"] = (config or EvalConfig()).to_dict()
    payload["env"] = get_python_env_info()
    return payload


def write_report(report: BaseModel, path: Path, config: Optional[EvalConfig] = None) -> None:
    """Write a report as JSON; floats keep their shortest round-trip form."""
    sentences = getattr(report, "sentences", None)
    if sentences is not None and not sentences:
        raise CorpusError("nothing to report: empty corpus")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report_payload(report, config), f, indent=2)
