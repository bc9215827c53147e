"""Bracket precision/recall/F1 (ParsEval) for discrete parse trees."""

import math
from collections import Counter
from typing import Iterable, Optional, Sequence, Union

from nltk import Tree
from pydantic import BaseModel, ConfigDict, model_validator

from treealign.config import DEFAULT_PUNCT_LABELS
from treealign.errors import CorpusError
from treealign.treebank import delete_preterminals, is_preterminal, parse_bracketed

Bracket = tuple[str, int, int]


class BracketSet(BaseModel):
    """Multiset of (label, left, right) brackets, 1-based inclusive word indices."""
    model_config = ConfigDict(frozen=True)

    brackets: tuple[Bracket, ...] = ()

    @model_validator(mode="after")
    def check_spans(self) -> "BracketSet":
        for label, left, right in self.brackets:
            if not 1 <= left <= right:
                raise ValueError(f"bracket {label}:[{left}, {right}] is not a span")
        return self

    @classmethod
    def of(cls, brackets: Iterable[Bracket]) -> "BracketSet":
        return cls(brackets=tuple(sorted(brackets, key=lambda b: (b[1], -b[2], b[0]))))

    def counts(self) -> Counter:
        return Counter(self.brackets)

    def __len__(self) -> int:
        return len(self.brackets)


class ParsevalScore(BaseModel):
    precision: float
    recall: float
    f1: float
    matched: int
    gold: int
    pred: int


class CorpusParseval(BaseModel):
    """Micro-averaged score plus the sentence-mean F1."""
    micro: ParsevalScore
    macro_f1: float
    sentences: list[ParsevalScore]


def extract_brackets(
    t: Union[str, Tree],
    labeled: bool = True,
    include_preterminals: bool = False,
    ignore_punct: bool = False,
    punct_labels: Optional[Sequence[str]] = None,
    **parse_options,
) -> BracketSet:
    """One bracket per counted constituent.

    The root is always counted. Nonterminals over a single word are
    kept; preterminals only when ``include_preterminals`` is set.
    """
    tree = t if isinstance(t, Tree) else parse_bracketed(t, **parse_options)
    if ignore_punct:
        labels = DEFAULT_PUNCT_LABELS if punct_labels is None else punct_labels
        tree = delete_preterminals(tree, labels)
        if tree is None:
            return BracketSet()

    brackets: list[Bracket] = []

    def walk(node: Tree, left: int) -> int:
        # returns the number of words under node
        if is_preterminal(node):
            if include_preterminals:
                brackets.append((node.label() if labeled else "", left, left))
            return 1
        width = 0
        for child in node:
            width += walk(child, left + width)
        brackets.append((node.label() if labeled else "", left, left + width - 1))
        return width

    walk(tree, 1)
    return BracketSet.of(brackets)


def _score(matched: int, gold: int, pred: int) -> ParsevalScore:
    if gold == 0 and pred == 0:
        return ParsevalScore(precision=1.0, recall=1.0, f1=1.0, matched=0, gold=0, pred=0)
    if gold == 0 or pred == 0:
        return ParsevalScore(precision=0.0, recall=0.0, f1=0.0, matched=0, gold=gold, pred=pred)
    return ParsevalScore(
        precision=matched / pred,
        recall=matched / gold,
        # harmonic mean of P and R, written so swapping sides is exact
        f1=2.0 * matched / (gold + pred),
        matched=matched,
        gold=gold,
        pred=pred,
    )


def score_pair(gold: BracketSet, pred: BracketSet) -> ParsevalScore:
    """Multiset bracket matching between a gold and a predicted set."""
    matched = sum((gold.counts() & pred.counts()).values())
    return _score(matched, len(gold), len(pred))


def score_corpus(pairs: Sequence[tuple[BracketSet, BracketSet]]) -> CorpusParseval:
    """Micro-average: matches and bracket counts are pooled before dividing."""
    if not pairs:
        raise CorpusError("nothing to score: empty corpus")
    sentences = [score_pair(gold, pred) for gold, pred in pairs]
    micro = _score(
        sum(s.matched for s in sentences),
        sum(s.gold for s in sentences),
        sum(s.pred for s in sentences),
    )
    return CorpusParseval(
        micro=micro,
        macro_f1=math.fsum(s.f1 for s in sentences) / len(sentences),
        sentences=sentences,
    )


def score_corpora(
    gold: Sequence[BracketSet],
    pred: Sequence[BracketSet],
) -> CorpusParseval:
    """Score two index-matched corpora."""
    if len(gold) != len(pred):
        raise CorpusError(f"gold has {len(gold)} trees but prediction has {len(pred)}")
    return score_corpus(list(zip(gold, pred)))


def tree_f1(
    gold: Union[str, Tree],
    pred: Union[str, Tree],
    labeled: bool = False,
    include_preterminals: bool = False,
) -> float:
    """F1 between two parses, the tree loss of MBR selection."""
    return score_pair(
        extract_brackets(gold, labeled, include_preterminals),
        extract_brackets(pred, labeled, include_preterminals),
    ).f1
