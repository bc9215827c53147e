"""Shared fixtures: the worked example trees and small corpora on disk."""

import json
from pathlib import Path

import pytest

from treealign.config import get_settings
from treealign.tree import SegmentNode, SegmentTree

FIXTURES = Path(__file__).resolve().parent.parent / "data" / "fixtures"

CAT_GOLD = "(S (NP (DT The) (NN cat)) (VP (V sat) (PP (IN on) (NP (DT the) (NN mat)))))"
CAT_PRED = "(S (NP (DT The) (NN cat)) (VP (V sat) (NP (DT on) (NN the) (NN mat))))"


def node(label, start, end, *children):
    return SegmentNode.make(label, start, end, children)


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def your_turn_gold() -> SegmentTree:
    return SegmentTree(root=node("NP", 2.56, 3.01, node("PRP", 2.56, 2.72), node("NN", 2.72, 3.01)))


@pytest.fixture
def your_turn_pred() -> SegmentTree:
    return SegmentTree(root=node(
        "VP", 2.55, 3.01,
        node("VBP", 2.55, 2.56),
        node("NP", 2.56, 3.01, node("PRP", 2.56, 2.72), node("NN", 2.72, 3.01)),
    ))


@pytest.fixture
def your_turn_shifted() -> SegmentTree:
    return SegmentTree(root=node("NP", 2.51, 3.10, node("PRP", 2.51, 2.70), node("NN", 2.70, 3.10)))


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def write_lines(path: Path, records) -> Path:
    with open(path, "w") as f:
        for record in records:
            f.write((record if isinstance(record, str) else json.dumps(record)) + "\n")
    return path
