"""Random relaxed segment trees for property tests.

Endpoints are multiples of 1/4 so every interval computation is exact.
"""

from typing import Optional, Sequence

import numpy as np
from hypothesis import strategies as st

from treealign.tree import SegmentNode, SegmentTree

LABELS = ("A", "B", "C", "D")


def build_tree(
    parents: Sequence[int],
    lengths: Sequence[float],
    gaps: Sequence[float],
    labels: Sequence[str],
    offset: float = 0.0,
) -> SegmentTree:
    """Tree with preorder parent list ``parents``; leaves laid out left to right."""
    children: list[list[int]] = [[] for _ in parents]
    for i, p in enumerate(parents[1:], start=1):
        children[p].append(i)
    cursor = [offset, 0]

    def make(i: int) -> SegmentNode:
        if not children[i]:
            k = cursor[1]
            start = cursor[0] + gaps[k]
            end = start + lengths[k]
            cursor[0], cursor[1] = end, k + 1
            return SegmentNode.make(labels[i], start, end)
        kids = [make(c) for c in children[i]]
        return SegmentNode.make(labels[i], kids[0].start, kids[-1].end, kids)

    return SegmentTree(root=make(0))


def _leaf_count(parents: Sequence[int]) -> int:
    return len(parents) - len(set(parents[1:]))


def random_tree(
    rng: np.random.Generator,
    max_nodes: int = 8,
    labels: Sequence[str] = LABELS,
    n_nodes: Optional[int] = None,
) -> SegmentTree:
    n = n_nodes if n_nodes is not None else int(rng.integers(1, max_nodes + 1))
    parents = [-1]
    path = [0]
    for i in range(1, n):
        d = int(rng.integers(len(path)))
        parents.append(path[d])
        path = path[:d + 1] + [i]
    n_leaves = _leaf_count(parents)
    return build_tree(
        parents,
        lengths=(rng.integers(1, 5, size=n_leaves) / 4).tolist(),
        gaps=(rng.choice([0, 0, 1, 2], size=n_leaves) / 4).tolist(),
        labels=[str(x) for x in rng.choice(labels, size=n)],
        offset=int(rng.integers(0, 4)) / 4,
    )


def balanced_tree(n_leaves: int, label: str = "X") -> SegmentTree:
    """Balanced binary tree over unit leaves (0,1), (1,2), ..."""

    def make(lo: int, hi: int) -> SegmentNode:
        if hi - lo == 1:
            return SegmentNode.make(label, lo, hi)
        mid = (lo + hi) // 2
        return SegmentNode.make(label, lo, hi, [make(lo, mid), make(mid, hi)])

    return SegmentTree(root=make(0, n_leaves))


@st.composite
def segment_trees(draw, max_nodes: int = 8, labels: Sequence[str] = LABELS) -> SegmentTree:
    n = draw(st.integers(1, max_nodes))
    parents = [-1]
    path = [0]
    for i in range(1, n):
        d = draw(st.integers(0, len(path) - 1))
        parents.append(path[d])
        path = path[:d + 1] + [i]
    n_leaves = _leaf_count(parents)
    lengths = draw(st.lists(st.integers(1, 4), min_size=n_leaves, max_size=n_leaves))
    gaps = draw(st.lists(st.sampled_from([0, 0, 1, 2]), min_size=n_leaves, max_size=n_leaves))
    return build_tree(
        parents,
        [x / 4 for x in lengths],
        [x / 4 for x in gaps],
        draw(st.lists(st.sampled_from(labels), min_size=n, max_size=n)),
        offset=draw(st.integers(0, 3)) / 4,
    )
