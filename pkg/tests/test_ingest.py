import json
import logging

import pytest
from conftest import CAT_GOLD, CAT_PRED, write_lines

from treealign import __version__
from treealign.align import corpus_struct_iou
from treealign.config import EvalConfig
from treealign.errors import CorpusError, TreeValidationError
from treealign.ingest import (
    load_corpus,
    read_boundaries,
    read_time_trees,
    read_trees,
    read_word_spans,
    report_payload,
    write_boundaries,
    write_report,
    write_time_trees,
)
from treealign.report import EvalReport
from treealign.tree import BoundarySequence

BAD_TREE = {
    "label": "NP", "start": 0.0, "end": 2.0,
    "children": [
        {"label": "A", "start": 0.0, "end": 1.5, "children": []},
        {"label": "B", "start": 1.0, "end": 2.0, "children": []},
    ],
}


def _leaf(label, start, end):
    return {"label": label, "start": start, "end": end, "children": []}


class TestLoadCorpus:
    def test_fixture_pair(self, fixtures_dir, your_turn_gold, your_turn_pred):
        pairs = load_corpus(fixtures_dir / "your_turn_gold.jsonl", fixtures_dir / "your_turn_pred.jsonl")
        assert len(pairs) == 1
        assert pairs[0].id == "your_turn"
        assert pairs[0].gold == your_turn_gold
        assert pairs[0].pred == your_turn_pred

    def test_line_pairing(self, tmp_path):
        gold = write_lines(tmp_path / "g.jsonl", [_leaf("A", 0, 1), _leaf("B", 1, 2)])
        pred = write_lines(tmp_path / "p.jsonl", [_leaf("A", 0, 1), _leaf("B", 1, 2)])
        pairs = load_corpus(gold, pred)
        assert [p.id for p in pairs] == ["0", "1"]

    def test_count_mismatch(self, tmp_path):
        gold = write_lines(tmp_path / "g.jsonl", [_leaf("A", 0, 1), _leaf("B", 1, 2)])
        pred = write_lines(tmp_path / "p.jsonl", [_leaf("A", 0, 1), _leaf("B", 1, 2), _leaf("C", 2, 3)])
        with pytest.raises(CorpusError, match="2 records but prediction has 3"):
            load_corpus(gold, pred)

    def test_invalid_record_is_named(self, tmp_path):
        gold = write_lines(tmp_path / "g.jsonl", [_leaf("A", 0, 1), BAD_TREE])
        pred = write_lines(tmp_path / "p.jsonl", [_leaf("A", 0, 1), _leaf("B", 0, 2)])
        with pytest.raises(TreeValidationError, match="gold record 2") as info:
            load_corpus(gold, pred)
        assert any(v.condition == "sibling_overlap" for v in info.value.violations)

    def test_skip_invalid(self, tmp_path, caplog):
        gold = write_lines(tmp_path / "g.jsonl", [_leaf("A", 0, 1), BAD_TREE])
        pred = write_lines(tmp_path / "p.jsonl", [_leaf("A", 0, 1), _leaf("B", 0, 2)])
        pairs = load_corpus(gold, pred, config=EvalConfig(skip_invalid=True))
        assert [p.id for p in pairs] == ["0"]
        assert "skipping gold record 2" in caplog.text

    def test_nothing_left(self, tmp_path):
        gold = write_lines(tmp_path / "g.jsonl", [BAD_TREE])
        pred = write_lines(tmp_path / "p.jsonl", [_leaf("B", 0, 2)])
        with pytest.raises(CorpusError):
            load_corpus(gold, pred, config=EvalConfig(skip_invalid=True))

    def test_join_by_id(self, tmp_path):
        gold = write_lines(tmp_path / "g.jsonl", [{"id": "a", **_leaf("A", 0, 1)}, {"id": "b", **_leaf("B", 0, 2)}])
        pred = write_lines(tmp_path / "p.jsonl", [{"id": "b", **_leaf("B", 0, 2)}, {"id": "a", **_leaf("A", 0, 1)}])
        pairs = load_corpus(gold, pred)
        assert [p.id for p in pairs] == ["a", "b"]
        assert all(p.gold == p.pred for p in pairs)

    def test_missing_id(self, tmp_path):
        gold = write_lines(tmp_path / "g.jsonl", [{"id": "a", **_leaf("A", 0, 1)}])
        pred = write_lines(tmp_path / "p.jsonl", [{"id": "z", **_leaf("A", 0, 1)}])
        with pytest.raises(CorpusError, match="no prediction"):
            load_corpus(gold, pred)

    def test_envelope_warning(self, tmp_path, caplog):
        gold = write_lines(tmp_path / "g.jsonl", [_leaf("A", 0, 1)])
        pred = write_lines(tmp_path / "p.jsonl", [_leaf("A", 0, 1.5)])
        with caplog.at_level(logging.WARNING, logger="treealign.ingest"):
            load_corpus(gold, pred)
        assert "prediction covers" in caplog.text

    def test_bracketed_with_boundaries(self, fixtures_dir, your_turn_gold):
        pairs = load_corpus(
            fixtures_dir / "your_turn.mrg",
            fixtures_dir / "your_turn.mrg",
            fmt="bracketed",
            gold_boundaries=fixtures_dir / "your_turn.words",
            pred_boundaries=fixtures_dir / "your_turn.words",
        )
        assert pairs[0].gold == your_turn_gold

    def test_bracketed_projection(self, fixtures_dir):
        pairs = load_corpus(fixtures_dir / "cat_gold.mrg", fixtures_dir / "cat_pred.mrg", fmt="bracketed")
        assert pairs[0].gold.interval.end == 6.0
        assert pairs[0].gold.unit == "word_index"

    def test_invalid_json(self, tmp_path):
        path = write_lines(tmp_path / "g.jsonl", ["{not json"])
        with pytest.raises(CorpusError, match=":1: invalid JSON"):
            read_time_trees(path)

    def test_unknown_format(self, fixtures_dir):
        with pytest.raises(CorpusError):
            read_trees(fixtures_dir / "cat_gold.mrg", "conll")


class TestBoundaries:
    def test_three_columns(self, fixtures_dir):
        (b,) = read_boundaries(fixtures_dir / "your_turn.words")
        assert b.words == ["Your", "turn"]
        assert b.boundaries == [2.56, 2.72, 3.01]

    def test_blank_lines_separate_utterances(self, tmp_path):
        path = write_lines(tmp_path / "b.words", ["a 0.0 0.5", "b 0.7 1.0", "", "", "c 0.0 1.0"])
        first, second = read_boundaries(path)
        assert first.boundaries == pytest.approx([0.0, 0.5, 0.8])
        assert second.words == ["c"]

    def test_jsonl_forms(self, tmp_path):
        path = write_lines(tmp_path / "b.jsonl", [
            [{"word": "a", "start": 0.0, "end": 0.5}],
            {"words": [{"word": "b", "start": 1.0, "end": 2.0}]},
        ])
        first, second = read_boundaries(path)
        assert first.boundaries == [0.0, 0.5]
        assert second.boundaries == [1.0, 2.0]

    def test_bad_line(self, tmp_path):
        path = write_lines(tmp_path / "b.words", ["a 0.0"])
        with pytest.raises(CorpusError, match="expected 'word start end'"):
            read_boundaries(path)

    def test_overlapping_words(self, tmp_path):
        path = write_lines(tmp_path / "b.words", ["a 0.0 0.5", "b 0.4 1.0"])
        with pytest.raises(CorpusError):
            read_boundaries(path)

    def test_write_then_read(self, tmp_path):
        b = BoundarySequence.from_boundaries([0.0, 0.25, 1.5], ["x", "y"])
        write_boundaries(tmp_path / "out.jsonl", [b])
        assert read_boundaries(tmp_path / "out.jsonl") == [b]

    def test_word_spans_keep_silences(self, tmp_path):
        path = write_lines(tmp_path / "b.words", ["a 0.0 0.5", "b 0.7 1.0", "", "c 0.0 1.0"])
        first, second = read_word_spans(path)
        assert [(s.word, s.start, s.end) for s in first] == [("a", 0.0, 0.5), ("b", 0.7, 1.0)]
        assert [s.word for s in second] == ["c"]

    def test_word_spans_bad_line(self, tmp_path):
        path = write_lines(tmp_path / "b.words", ["a 0.0 0.5", "b 0.7"])
        with pytest.raises(CorpusError, match="b.words:2"):
            read_word_spans(path)


def test_time_trees_keep_ids(tmp_path, your_turn_gold):
    write_time_trees(tmp_path / "t.jsonl", [your_turn_gold], ids=["u1"])
    assert read_time_trees(tmp_path / "t.jsonl") == [("u1", your_turn_gold)]


class TestReports:
    def test_write_report(self, tmp_path, your_turn_gold, your_turn_pred):
        report = corpus_struct_iou([(your_turn_gold, your_turn_pred)], ids=["your_turn"])
        config = EvalConfig(jobs=2)
        write_report(report, tmp_path / "out" / "report.json", config)
        data = json.loads((tmp_path / "out" / "report.json").read_text())
        assert data["corpus"] == 0.75
        assert data["metric"] == "struct_iou"
        assert data["version"] == __version__
        assert data["config"]["jobs"] == 2
        assert data["sentences"][0]["id"] == "your_turn"
        assert "python_version" in data["env"]

    def test_empty_report_refused(self, tmp_path):
        report = EvalReport(metric="struct_iou", label_mode="unlabeled", corpus=0.0, sentence_mean=0.0, sentences=[])
        with pytest.raises(CorpusError):
            write_report(report, tmp_path / "report.json")

    def test_payload_defaults(self, your_turn_gold):
        report = corpus_struct_iou([(your_turn_gold, your_turn_gold)])
        payload = report_payload(report)
        assert payload["config"] == EvalConfig().to_dict()
        assert payload["corpus"] == 1.0


def test_cat_fixtures_on_disk(fixtures_dir):
    assert (fixtures_dir / "cat_gold.mrg").read_text().strip() == CAT_GOLD
    assert (fixtures_dir / "cat_pred.mrg").read_text().strip() == CAT_PRED
