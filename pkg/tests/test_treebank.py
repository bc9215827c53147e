import pytest

from treealign.errors import BracketParseError
from treealign.treebank import delete_preterminals, parse_bracketed, preterminals, read_bracketed_file, strip_function_tag


def test_parse_simple_tree():
    tree = parse_bracketed("(NP (PRP Your) (NN turn))")
    assert tree.label() == "NP"
    assert tree.leaves() == ["Your", "turn"]
    assert [p.label() for p in preterminals(tree)] == ["PRP", "NN"]


def test_unwraps_empty_root():
    tree = parse_bracketed("( (S (NP (DT a)) (VP (V b))) )")
    assert tree.label() == "S"
    kept = parse_bracketed("( (S (NP (DT a)) (VP (V b))) )", unwrap_empty_root=False)
    assert kept.label() == ""


@pytest.mark.parametrize("label, expected", [
    ("NP-SBJ", "NP"),
    ("NP-SBJ-1", "NP"),
    ("PP=2", "PP"),
    ("-NONE-", "-NONE-"),
    ("VP", "VP"),
])
def test_strip_function_tag(label, expected):
    assert strip_function_tag(label) == expected


def test_strip_function_tags_on_parse():
    tree = parse_bracketed("(S (NP-SBJ (PRP I)) (VP (V ran)))", strip_function_tags=True)
    assert [t.label() for t in tree.subtrees()] == ["S", "NP", "PRP", "VP", "V"]


@pytest.mark.parametrize("text", [
    "(NP (DT the) (NN cat)",
    "(NP (DT the)) (NN cat))",
    "NP (DT the)",
])
def test_malformed_bracketing(text):
    with pytest.raises(BracketParseError):
        parse_bracketed(text)


def test_error_carries_offset():
    with pytest.raises(BracketParseError) as info:
        parse_bracketed("(NP (DT the)) extra)")
    assert info.value.offset is not None
    assert "at character" in str(info.value)


def test_lexical_item_must_be_only_child():
    with pytest.raises(BracketParseError, match="not the only child"):
        parse_bracketed("(NP the (NN cat))")


def test_empty_constituent_rejected():
    with pytest.raises(BracketParseError, match="no children"):
        parse_bracketed("(S (NP) (VP (V ran)))")


def test_delete_preterminals_prunes_empty_constituents():
    tree = parse_bracketed("(S (NP (DT the) (NN cat)) (PU (, ,)) (VP (V sat)) (. .))")
    pruned = delete_preterminals(tree, [",", "."])
    assert pruned.leaves() == ["the", "cat", "sat"]
    assert [t.label() for t in pruned] == ["NP", "VP"]
    assert delete_preterminals(parse_bracketed("(S (. .))"), ["."]) is None


def test_read_bracketed_file_skips_blank_lines(tmp_path):
    path = tmp_path / "trees.mrg"
    path.write_text("(A (B b))\n\n(C (D d))\n")
    assert read_bracketed_file(path) == ["(A (B b))", "(C (D d))"]
