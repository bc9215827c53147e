"""Reading PTB-style bracketed parses.

Trees are read with ``nltk.Tree.fromstring`` and then checked for the shape
every metric here relies on: each lexical item is the only child of a
preterminal, and every other node has at least one subtree child.
"""

import logging
import re
from pathlib import Path
from typing import Iterable, Optional

from nltk import Tree

from treealign.errors import BracketParseError

logger = logging.getLogger(__name__)

_INDEX_RE = re.compile(r"at index (\d+)")
_FUNCTION_TAG_RE = re.compile(r"^([^-=]+)[-=].*$")


def strip_function_tag(label: str) -> str:
    """``NP-SBJ-1`` -> ``NP``; labels that start with '-' (``-NONE-``) are kept."""
    match = _FUNCTION_TAG_RE.match(label)
    return match.group(1) if match else label


def is_preterminal(node: Tree) -> bool:
    return len(node) == 1 and isinstance(node[0], str)


def parse_bracketed(
    text: str,
    strip_function_tags: bool = False,
    unwrap_empty_root: bool = True,
) -> Tree:
    """Parse one bracketed tree and check it is well formed."""
    text = text.strip()
    if not text.startswith("("):
        raise BracketParseError("bracketed parse must start with '('", 0)
    try:
        tree = Tree.fromstring(text)
    except ValueError as e:
        match = _INDEX_RE.search(str(e))
        offset = int(match.group(1)) if match else None
        raise BracketParseError(f"malformed bracketing: {str(e).splitlines()[0]}", offset) from e

    if not isinstance(tree, Tree):
        raise BracketParseError("bracketed parse has no constituents", 0)

    # PTB files wrap each sentence in an unlabeled bracket: "( (S ...) )"
    while (
        unwrap_empty_root
        and tree.label() == ""
        and len(tree) == 1
        and isinstance(tree[0], Tree)
    ):
        tree = tree[0]

    _check_shape(tree, text)

    if strip_function_tags:
        for sub in tree.subtrees():
            sub.set_label(strip_function_tag(sub.label()))
    return tree


def _check_shape(tree: Tree, text: str) -> None:
    for position in tree.treepositions():
        node = tree[position]
        if not isinstance(node, Tree):
            continue
        if len(node) == 0:
            raise BracketParseError(
                f"constituent {node.label()!r} at {list(position)} has no children",
                _locate(text, f"({node.label()}"),
            )
        words = [child for child in node if isinstance(child, str)]
        if words and len(node) > 1:
            raise BracketParseError(
                f"lexical item {words[0]!r} is not the only child of {node.label()!r}",
                _locate(text, words[0]),
            )


def _locate(text: str, needle: str) -> Optional[int]:
    offset = text.find(needle)
    return offset if offset >= 0 else None


def preterminals(tree: Tree) -> list[Tree]:
    """Preterminal subtrees, left to right."""
    return [sub for sub in tree.subtrees() if is_preterminal(sub)]


def delete_preterminals(tree: Tree, labels: Iterable[str]) -> Optional[Tree]:
    """Copy of ``tree`` without preterminals carrying one of ``labels``.

    Constituents left without children are removed too. Returns None when
    nothing is left.
    """
    labels = set(labels)

    def prune(node: Tree) -> Optional[Tree]:
        if is_preterminal(node):
            return None if node.label() in labels else Tree(node.label(), [node[0]])
        kept = [c for c in (prune(child) for child in node) if c is not None]
        return Tree(node.label(), kept) if kept else None

    return prune(tree)


def read_bracketed_file(path: Path) -> list[str]:
    """One tree per non-blank line."""
    with open(path, "r", encoding="utf-8") as f:
        lines = [line.strip() for line in f]
    return [line for line in lines if line]
