import pytest
from conftest import CAT_GOLD, CAT_PRED

from treealign.errors import CorpusError
from treealign.parseval import (
    BracketSet,
    extract_brackets,
    score_corpora,
    score_corpus,
    score_pair,
    tree_f1,
)


def test_gold_brackets():
    brackets = extract_brackets(CAT_GOLD)
    assert sorted(brackets.brackets) == sorted([
        ("S", 1, 6), ("NP", 1, 2), ("VP", 3, 6), ("PP", 4, 6), ("NP", 5, 6),
    ])


def test_pred_brackets():
    assert len(extract_brackets(CAT_PRED)) == 4


def test_worked_example_scores():
    score = score_pair(extract_brackets(CAT_GOLD), extract_brackets(CAT_PRED))
    assert score.precision == pytest.approx(3 / 4)
    assert score.recall == pytest.approx(3 / 5)
    assert score.f1 == pytest.approx(2 / 3)
    assert score.matched == 3


def test_single_word_sentence_is_empty():
    assert len(extract_brackets("(NN cat)")) == 0
    assert len(extract_brackets("(NN cat)", include_preterminals=True)) == 1


def test_single_word_constituent_kept():
    assert extract_brackets("(S (NP (NN cat)))").brackets == (("NP", 1, 1), ("S", 1, 1))


def test_nonterminal_over_one_word_counts():
    # only a rootless preterminal yields no brackets
    assert extract_brackets("(S (NN cat))").brackets == (("S", 1, 1),)


def test_preterminals_toggle():
    assert len(extract_brackets(CAT_GOLD, include_preterminals=True)) == 11


def test_unlabeled_erases_labels():
    brackets = extract_brackets(CAT_PRED, labeled=False)
    assert {label for label, _, _ in brackets.brackets} == {""}
    # PP:[4,6] and NP:[4,6] coincide once labels are gone
    score = score_pair(extract_brackets(CAT_GOLD, labeled=False), brackets)
    assert score.matched == 4


def test_ignore_punct():
    tree = "(S (NP (NN cat)) (VP (V sat)) (. .))"
    brackets = extract_brackets(tree, ignore_punct=True)
    assert ("S", 1, 2) in brackets.brackets
    assert extract_brackets("(. .)", ignore_punct=True, include_preterminals=True) == BracketSet()


def test_identical_and_disjoint():
    x = BracketSet.of([("A", 1, 2), ("B", 1, 4)])
    assert score_pair(x, x).f1 == 1.0
    disjoint = score_pair(
        BracketSet.of([("A", 1, 2), ("B", 2, 3)]),
        BracketSet.of([("C", 1, 2), ("A", 3, 4), ("B", 1, 1)]),
    )
    assert (disjoint.precision, disjoint.recall, disjoint.f1) == (0.0, 0.0, 0.0)


def test_empty_conventions():
    x = BracketSet.of([("A", 1, 2)])
    assert score_pair(BracketSet(), BracketSet()).f1 == 1.0
    assert score_pair(x, BracketSet()).f1 == 0.0
    assert score_pair(BracketSet(), x).precision == 0.0


def test_duplicates_are_multiset_counted():
    gold = BracketSet.of([("NP", 1, 1), ("NP", 1, 1)])
    pred = BracketSet.of([("NP", 1, 1)])
    score = score_pair(gold, pred)
    assert score.matched == 1
    assert score.recall == 0.5


def test_swap_symmetry():
    gold, pred = extract_brackets(CAT_GOLD), extract_brackets(CAT_PRED)
    forward, backward = score_pair(gold, pred), score_pair(pred, gold)
    assert forward.precision == backward.recall
    assert forward.recall == backward.precision
    assert forward.f1 == backward.f1


def test_bad_span_rejected():
    with pytest.raises(ValueError):
        BracketSet.of([("A", 3, 2)])
    with pytest.raises(ValueError):
        BracketSet.of([("A", 0, 1)])


class TestCorpus:
    def test_pooled(self):
        # (3 matched of 4 pred / 5 gold) plus (1 of 1 / 1)
        first = (
            BracketSet.of([("A", 1, 1), ("B", 1, 2), ("C", 1, 3), ("D", 1, 4), ("E", 1, 5)]),
            BracketSet.of([("A", 1, 1), ("B", 1, 2), ("C", 1, 3), ("Z", 2, 2)]),
        )
        second = (BracketSet.of([("A", 1, 2)]), BracketSet.of([("A", 1, 2)]))
        result = score_corpus([first, second])
        assert result.micro.precision == pytest.approx(4 / 5)
        assert result.micro.recall == pytest.approx(4 / 6)
        assert result.macro_f1 == pytest.approx((6 / 9 + 1.0) / 2)

    def test_single_pair_matches_sentence(self):
        pair = (extract_brackets(CAT_GOLD), extract_brackets(CAT_PRED))
        assert score_corpus([pair]).micro == score_pair(*pair)

    def test_identical(self):
        sets = [extract_brackets(CAT_GOLD), extract_brackets(CAT_PRED)]
        assert score_corpora(sets, sets).micro.f1 == 1.0

    def test_errors(self):
        with pytest.raises(CorpusError):
            score_corpus([])
        with pytest.raises(CorpusError):
            score_corpora([BracketSet()], [])


def test_tree_f1_unlabeled():
    assert tree_f1(CAT_GOLD, CAT_PRED) == pytest.approx(8 / 9)
    assert tree_f1(CAT_GOLD, CAT_PRED, labeled=True) == pytest.approx(2 / 3)
