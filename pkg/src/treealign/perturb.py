"""Seeded word-boundary perturbations for robustness studies.

Every procedure consumes its generator in a fixed loop order (boundaries or
words left to right, one draw per step), so a given seed reproduces the same
output bit for bit. Corpus runs derive one generator per utterance with
``utterance_rng``.
"""

import logging
from typing import Literal, Protocol

import numpy as np
from pydantic import BaseModel, Field

from treealign.config import epsilon
from treealign.errors import BoundaryError
from treealign.tree import (
    BoundarySequence,
    SegmentNode,
    SegmentTree,
    leaf_boundaries,
    require_valid,
    with_leaf_boundaries,
)

logger = logging.getLogger(__name__)

PerturbKind = Literal["noise", "insert", "delete"]


class UniformSource(Protocol):
    def uniform(self, low: float, high: float) -> float: ...


class PerturbSpec(BaseModel):
    kind: PerturbKind
    delta: float = Field(ge=0.0, le=1.0)
    seed: int = Field(default=0, ge=0, lt=2**64)


def utterance_rng(seed: int, index: int) -> np.random.Generator:
    """Independent PCG64 stream for utterance ``index`` of a corpus seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def perturb_noise(b: BoundarySequence, delta: float, rng: UniformSource) -> BoundarySequence:
    """Noise-delta: move each internal boundary toward a neighbour.

    For i = 1..n-1, r ~ U(-delta, delta) and b_i moves |r| of the way to
    b_(i+1) when r >= 0, else to b_(i-1). Updates are sequential, so a moved
    boundary is the neighbour of the next one.
    """
    _check_delta(delta)
    eps = epsilon()
    values = list(b.boundaries)
    for i in range(1, len(values) - 1):
        r = float(rng.uniform(-delta, delta))
        neighbour = values[i + 1] if r >= 0 else values[i - 1]
        moved = values[i] + abs(r) * (neighbour - values[i])
        # |r| = 1 would merge two words; the boundary then stays put
        if abs(neighbour - moved) <= eps:
            logger.debug("boundary %d would collapse onto its neighbour, left at %r", i, values[i])
            continue
        values[i] = moved
    return BoundarySequence(words=list(b.words), boundaries=values)


def perturb_delete(b: BoundarySequence, delta: float, rng: UniformSource) -> BoundarySequence:
    """Delete-delta: drop internal boundary b_i when r_i ~ U(0, 1) falls below delta.

    Words on both sides of a dropped boundary merge, joined by a space.
    """
    _check_delta(delta)
    boundaries = [b.boundaries[0]]
    words: list[str] = []
    group = [b.words[0]]
    for i in range(1, b.n_words):
        r = float(rng.uniform(0.0, 1.0))
        if r < delta:
            group.append(b.words[i])
            continue
        boundaries.append(b.boundaries[i])
        words.append(" ".join(w for w in group if w))
        group = [b.words[i]]
    boundaries.append(b.boundaries[-1])
    words.append(" ".join(w for w in group if w))
    return BoundarySequence(words=words, boundaries=boundaries)


def perturb_insert(t: SegmentTree, delta: float, rng: UniformSource) -> SegmentTree:
    """Insert-delta: split leaf i at b' ~ U(start_i, end_i) when r_i ~ U(0, 1) < delta.

    The two halves become sibling leaves under the split leaf's parent and
    keep its label; a leaf root becomes a root over the two halves. A draw
    within epsilon of a leaf endpoint leaves that leaf whole.
    """
    _check_delta(delta)
    eps = epsilon()

    def split(leaf: SegmentNode) -> list[SegmentNode]:
        r = float(rng.uniform(0.0, 1.0))
        if not r < delta:
            return [leaf]
        cut = float(rng.uniform(leaf.start, leaf.end))
        if cut - leaf.start <= eps or leaf.end - cut <= eps:
            logger.warning("skipping degenerate split of %s at %r", leaf.interval, cut)
            return [leaf]
        return [
            SegmentNode.make(leaf.label, leaf.start, cut),
            SegmentNode.make(leaf.label, cut, leaf.end),
        ]

    def rebuild(node: SegmentNode) -> SegmentNode:
        children: list[SegmentNode] = []
        for child in node.children:
            if child.is_leaf:
                children.extend(split(child))
            else:
                children.append(rebuild(child))
        return SegmentNode(label=node.label, interval=node.interval, children=tuple(children))

    if t.root.is_leaf:
        halves = split(t.root)
        root = t.root if len(halves) == 1 else SegmentNode(
            label=t.root.label, interval=t.root.interval, children=tuple(halves)
        )
    else:
        root = rebuild(t.root)
    out = SegmentTree(root=root, unit=t.unit)
    require_valid(out, "inserted boundaries")
    return out


def perturb_tree_noise(t: SegmentTree, delta: float, rng: UniformSource) -> SegmentTree:
    """Noise-delta on the leaf boundaries of a tree whose leaves tile its root."""
    b = BoundarySequence.from_boundaries(leaf_boundaries(t))
    return with_leaf_boundaries(t, perturb_noise(b, delta, rng).boundaries)


def perturb_tree(t: SegmentTree, kind: PerturbKind, delta: float, rng: UniformSource) -> SegmentTree:
    """Apply a tree-level perturbation; deletion needs a re-parse and is refused."""
    if kind == "noise":
        return perturb_tree_noise(t, delta, rng)
    if kind == "insert":
        return perturb_insert(t, delta, rng)
    raise BoundaryError(
        "delete perturbs boundaries only; re-parse the merged words to obtain a tree"
    )


def _check_delta(delta: float) -> None:
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
