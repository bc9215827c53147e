"""Relaxed segment trees: data model, validation, and projection of parses.

A relaxed segment tree carries an open interval on every node; children are
pairwise disjoint and a parent's interval is the envelope of its children.
Terminal lexical items are never nodes: a preterminal is a leaf.
"""

import logging
from typing import Any, Literal, Optional, Sequence, Union

from nltk import Tree
from pydantic import BaseModel, ConfigDict, PrivateAttr, field_validator, model_validator

from treealign.config import Unit, epsilon
from treealign.errors import BoundaryError, TreeAlignError, TreeValidationError
from treealign.interval import Interval, contains, intersection_size
from treealign.treebank import is_preterminal, parse_bracketed

logger = logging.getLogger(__name__)

Path = tuple[int, ...]


class SegmentNode(BaseModel):
    """Labeled node with an interval and disjoint, start-ordered children."""
    model_config = ConfigDict(frozen=True)

    label: str = ""
    interval: Interval
    children: tuple["SegmentNode", ...] = ()

    @model_validator(mode="before")
    @classmethod
    def accept_flat_endpoints(cls, data: Any) -> Any:
        # time-tree JSON carries "start"/"end" next to the label
        if isinstance(data, dict) and "interval" not in data and "start" in data:
            data = dict(data)
            data["interval"] = {"start": data.pop("start"), "end": data.pop("end")}
        return data

    @field_validator("children")
    @classmethod
    def order_children(cls, v: tuple["SegmentNode", ...]) -> tuple["SegmentNode", ...]:
        return tuple(sorted(v, key=lambda c: c.interval.start))

    @property
    def start(self) -> float:
        return self.interval.start

    @property
    def end(self) -> float:
        return self.interval.end

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @classmethod
    def make(
        cls,
        label: str,
        start: float,
        end: float,
        children: Sequence["SegmentNode"] = (),
    ) -> "SegmentNode":
        return cls(label=label, interval=Interval(start=start, end=end), children=tuple(children))

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "start": self.start,
            "end": self.end,
            "children": [child.to_json() for child in self.children],
        }


class SegmentTree(BaseModel):
    """A relaxed segment tree: a root plus its unit of measurement.

    Nodes are addressed by preorder index; ``paths[i]`` lists the child
    indices leading from the root to node ``i``.
    """
    model_config = ConfigDict(frozen=True)

    root: SegmentNode
    unit: Unit = "seconds"

    _nodes: list[SegmentNode] = PrivateAttr(default_factory=list)
    _paths: list[Path] = PrivateAttr(default_factory=list)
    _parents: list[int] = PrivateAttr(default_factory=list)
    _sizes: list[int] = PrivateAttr(default_factory=list)

    def model_post_init(self, __context: Any) -> None:
        nodes: list[SegmentNode] = []
        paths: list[Path] = []
        parents: list[int] = []
        sizes: list[int] = []
        stack: list[tuple[SegmentNode, Path, int]] = [(self.root, (), -1)]
        while stack:
            node, path, parent = stack.pop()
            nodes.append(node)
            paths.append(path)
            parents.append(parent)
            sizes.append(1)
            me = len(nodes) - 1
            for k in range(len(node.children) - 1, -1, -1):
                stack.append((node.children[k], path + (k,), me))
        for i in range(len(nodes) - 1, 0, -1):
            sizes[parents[i]] += sizes[i]
        self._nodes = nodes
        self._paths = paths
        self._parents = parents
        self._sizes = sizes

    @property
    def nodes(self) -> list[SegmentNode]:
        return self._nodes

    @property
    def paths(self) -> list[Path]:
        return self._paths

    @property
    def parents(self) -> list[int]:
        return self._parents

    @property
    def subtree_sizes(self) -> list[int]:
        return self._sizes

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def interval(self) -> Interval:
        return self.root.interval

    def leaves(self) -> list[SegmentNode]:
        return [node for node in self._nodes if node.is_leaf]

    def is_ancestor(self, i: int, j: int) -> bool:
        """True if node ``i`` is a proper ancestor of node ``j``."""
        return i < j < i + self._sizes[i]

    def labels(self) -> list[str]:
        return [node.label for node in self._nodes]

    def to_json(self) -> dict:
        return self.root.to_json()

    @classmethod
    def from_json(cls, data: dict, unit: Unit = "seconds") -> "SegmentTree":
        return cls(root=SegmentNode.model_validate(data), unit=unit)


class WordSpan(BaseModel):
    """One word of a forced alignment, possibly followed by silence."""
    word: str = ""
    start: float
    end: float


class BoundarySequence(BaseModel):
    """Monotone word boundaries b0..bn; word i occupies (b_i, b_i+1)."""
    model_config = ConfigDict(frozen=True)

    words: list[str]
    boundaries: list[float]

    @model_validator(mode="after")
    def check_monotone(self) -> "BoundarySequence":
        if len(self.boundaries) != len(self.words) + 1:
            raise ValueError(
                f"{len(self.words)} words need {len(self.words) + 1} boundaries, "
                f"got {len(self.boundaries)}"
            )
        if not self.words:
            raise ValueError("boundary sequence needs at least one word")
        eps = epsilon()
        for i in range(len(self.boundaries) - 1):
            if not self.boundaries[i + 1] - self.boundaries[i] > eps:
                raise ValueError(
                    f"boundaries must strictly increase: b[{i}]={self.boundaries[i]} "
                    f">= b[{i + 1}]={self.boundaries[i + 1]}"
                )
        return self

    @classmethod
    def from_boundaries(
        cls,
        boundaries: Sequence[float],
        words: Optional[Sequence[str]] = None,
    ) -> "BoundarySequence":
        if words is None:
            words = [""] * (len(boundaries) - 1)
        return cls(words=list(words), boundaries=[float(b) for b in boundaries])

    @property
    def n_words(self) -> int:
        return len(self.words)

    def internal(self) -> list[float]:
        """Boundaries b1..b(n-1); the utterance endpoints are given, not predicted."""
        return self.boundaries[1:-1]

    def word_spans(self) -> list[WordSpan]:
        return [
            WordSpan(word=w, start=self.boundaries[i], end=self.boundaries[i + 1])
            for i, w in enumerate(self.words)
        ]

    def intervals(self) -> list[Interval]:
        return [
            Interval(start=self.boundaries[i], end=self.boundaries[i + 1])
            for i in range(len(self.words))
        ]


class Violation(BaseModel):
    """A node breaking one of the relaxed segment tree conditions."""
    path: Path
    label: str
    condition: Literal["sibling_overlap", "span_law", "outside_root"]
    message: str

    def __str__(self) -> str:
        return f"node {list(self.path)} ({self.label}): {self.condition}: {self.message}"


def validate(t: SegmentTree) -> list[Violation]:
    """Every violated condition, as data; empty when the tree is valid."""
    eps = epsilon()
    violations: list[Violation] = []
    for node, path in zip(t.nodes, t.paths):
        if node is not t.root and not contains(t.root.interval, node.interval):
            violations.append(Violation(
                path=path, label=node.label, condition="outside_root",
                message=f"{node.interval} is not inside root {t.root.interval}",
            ))
        if node.is_leaf:
            continue
        kids = node.children
        for a in range(len(kids)):
            for b in range(a + 1, len(kids)):
                if intersection_size(kids[a].interval, kids[b].interval) > 0.0:
                    violations.append(Violation(
                        path=path, label=node.label, condition="sibling_overlap",
                        message=(
                            f"children {a} {kids[a].label}{kids[a].interval} and "
                            f"{b} {kids[b].label}{kids[b].interval} overlap"
                        ),
                    ))
        lo = min(k.start for k in kids)
        hi = max(k.end for k in kids)
        if abs(node.start - lo) > eps or abs(node.end - hi) > eps:
            violations.append(Violation(
                path=path, label=node.label, condition="span_law",
                message=f"{node.interval} is not the children envelope ({lo}, {hi})",
            ))
    return violations


def _from_parse(node: Tree, spans: list[tuple[float, float]], cursor: list[int]) -> SegmentNode:
    if is_preterminal(node):
        start, end = spans[cursor[0]]
        cursor[0] += 1
        return SegmentNode.make(node.label(), start, end)
    children = [_from_parse(child, spans, cursor) for child in node]
    return SegmentNode.make(
        node.label(),
        min(c.start for c in children),
        max(c.end for c in children),
        children,
    )


def _as_parse(bracketed: Union[str, Tree], **parse_options) -> Tree:
    if isinstance(bracketed, Tree):
        return bracketed
    return parse_bracketed(bracketed, **parse_options)


def project_text(
    bracketed: Union[str, Tree],
    granularity: Literal["word", "char"] = "word",
    **parse_options,
) -> SegmentTree:
    """Project a text parse onto unit coordinates.

    Word granularity puts leaf token k on (k, k+1); char granularity gives
    each character of the concatenated leaf text one unit.
    """
    parse = _as_parse(bracketed, **parse_options)
    words = parse.leaves()
    spans: list[tuple[float, float]] = []
    if granularity == "word":
        spans = [(float(k), float(k + 1)) for k in range(len(words))]
        unit: Unit = "word_index"
    elif granularity == "char":
        offset = 0
        for word in words:
            spans.append((float(offset), float(offset + len(word))))
            offset += len(word)
        unit = "char_index"
    else:
        raise ValueError(f"unknown granularity: {granularity}")
    return SegmentTree(root=_from_parse(parse, spans, [0]), unit=unit)


def attach_boundaries(
    bracketed: Union[str, Tree],
    b: BoundarySequence,
    case_insensitive: bool = False,
    **parse_options,
) -> SegmentTree:
    """Put a text parse on the time axis using forced-alignment boundaries."""
    parse = _as_parse(bracketed, **parse_options)
    leaves = parse.leaves()
    if len(leaves) != b.n_words:
        raise BoundaryError(
            f"parse has {len(leaves)} words but boundaries cover {b.n_words}"
        )
    for k, (leaf, word) in enumerate(zip(leaves, b.words)):
        same = leaf.lower() == word.lower() if case_insensitive else leaf == word
        if not same:
            raise BoundaryError(f"word {k} differs: parse has {leaf!r}, boundaries have {word!r}")
    spans = [(b.boundaries[k], b.boundaries[k + 1]) for k in range(b.n_words)]
    return SegmentTree(root=_from_parse(parse, spans, [0]), unit="seconds")


def remove_gaps(spans: Sequence[WordSpan]) -> BoundarySequence:
    """Close inter-word silences by shifting words left, keeping durations."""
    if not spans:
        raise BoundaryError("no words to compact")
    eps = epsilon()
    boundaries = [spans[0].start]
    for k, span in enumerate(spans):
        if not span.end - span.start > eps:
            raise BoundaryError(f"word {k} ({span.word!r}) has non-positive duration")
        if k > 0 and span.start < spans[k - 1].end - eps:
            raise BoundaryError(
                f"word {k} ({span.word!r}) starts at {span.start}, "
                f"before word {k - 1} ends at {spans[k - 1].end}"
            )
        start = boundaries[-1]
        # no-op when already gapless, so compaction is idempotent
        end = span.end if abs(span.start - start) <= eps else start + (span.end - span.start)
        boundaries.append(end)
    return BoundarySequence(words=[s.word for s in spans], boundaries=boundaries)


def count_nodes(t: SegmentTree, include_preterminals: bool = True) -> int:
    """|N_T|; terminals are never nodes, preterminals (leaves) optionally."""
    if include_preterminals or t.root.is_leaf:
        return t.node_count
    return sum(1 for node in t.nodes if not node.is_leaf)


def without_preterminals(t: SegmentTree) -> SegmentTree:
    """Tree with every leaf removed (a lone leaf root is kept)."""
    if t.root.is_leaf:
        return t

    def strip(node: SegmentNode) -> SegmentNode:
        kept = [strip(c) for c in node.children if not c.is_leaf]
        return SegmentNode(label=node.label, interval=node.interval, children=tuple(kept))

    return SegmentTree(root=strip(t.root), unit=t.unit)


def leaf_boundaries(t: SegmentTree) -> list[float]:
    """Boundaries of a tree whose leaves tile the root interval."""
    eps = epsilon()
    leaves = t.leaves()
    boundaries = [leaves[0].start]
    for k, leaf in enumerate(leaves):
        if abs(leaf.start - boundaries[-1]) > eps:
            raise BoundaryError(f"leaf {k} starts at {leaf.start}, previous ends at {boundaries[-1]}")
        boundaries.append(leaf.end)
    return boundaries


def with_leaf_boundaries(t: SegmentTree, boundaries: Sequence[float]) -> SegmentTree:
    """Re-time a tree: leaf k gets (b_k, b_k+1), ancestors their envelopes."""
    n_leaves = sum(1 for node in t.nodes if node.is_leaf)
    if len(boundaries) != n_leaves + 1:
        raise BoundaryError(f"{n_leaves} leaves need {n_leaves + 1} boundaries, got {len(boundaries)}")
    cursor = [0]

    def retime(node: SegmentNode) -> SegmentNode:
        if node.is_leaf:
            k = cursor[0]
            cursor[0] += 1
            return SegmentNode.make(node.label, boundaries[k], boundaries[k + 1])
        children = [retime(c) for c in node.children]
        return SegmentNode.make(
            node.label, min(c.start for c in children), max(c.end for c in children), children
        )

    return SegmentTree(root=retime(t.root), unit=t.unit)


def require_valid(t: SegmentTree, context: str = "") -> None:
    violations = validate(t)
    if violations:
        raise TreeValidationError(violations, context)


def envelope(trees: Sequence[SegmentTree]) -> Interval:
    if not trees:
        raise TreeAlignError("envelope of no trees")
    return Interval(
        start=min(t.root.start for t in trees),
        end=max(t.root.end for t in trees),
    )
