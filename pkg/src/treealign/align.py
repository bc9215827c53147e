"""Struct-IoU: optimal conflict-free alignment of two relaxed segment trees.

The unrestricted alignment problem is reduced to the root-aligned one by
giving each tree a dummy root on the shared envelope of both trees. For a
root-aligned pair (u, v),

    f(u, v) = IoU(u, v) + max sum_k f(d1_k, d2_k)

over equal-length ordered disjoint descendant sequences d1 of u and d2 of
v. The inner maximum is a knapsack-style table g over (right endpoint in
u, right endpoint in v), filled in increasing right-endpoint order with
running prefix maxima. Total work is O(n^2 m^2).
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel

from treealign.config import LabelMode, epsilon
from treealign.errors import CorpusError, OracleSizeError, TreeAlignError
from treealign.interval import compress, iou_matrix, rank
from treealign.report import EvalReport, SentenceScore
from treealign.tree import SegmentTree, count_nodes, envelope, require_valid, without_preterminals

logger = logging.getLogger(__name__)

ORACLE_MAX_NODES = 20


class AlignedPair(BaseModel):
    """node1/node2 are preorder indices in the first/second tree."""
    node1: int
    node2: int
    iou: float


class Alignment(BaseModel):
    pairs: list[AlignedPair]
    total_weight: float

    def as_tuples(self) -> list[tuple[int, int]]:
        return [(p.node1, p.node2) for p in self.pairs]


class StructIoUScore(BaseModel):
    score: float
    n1: int
    n2: int
    weight: float


@dataclass
class _Descendants:
    """Strict descendants of one node, sorted by (end, start)."""
    order: np.ndarray   # flat node indices
    rs: np.ndarray      # local rank of each start
    re: np.ndarray      # local rank of each end
    n_coords: int
    groups: list[tuple[int, slice]]  # (end rank, slice of order) ascending


@dataclass
class _FlatTree:
    """Preorder arrays with a dummy root at index 0."""
    starts: np.ndarray
    ends: np.ndarray
    labels: list[Optional[str]]
    sizes: np.ndarray
    desc: list[Optional[_Descendants]]

    @property
    def size(self) -> int:
        return len(self.labels)


def _flatten(t: SegmentTree, lo: float, hi: float, eps: float) -> _FlatTree:
    starts = np.array([lo] + [node.start for node in t.nodes], dtype=np.float64)
    ends = np.array([hi] + [node.end for node in t.nodes], dtype=np.float64)
    labels: list[Optional[str]] = [None] + t.labels()
    sizes = np.array([t.node_count + 1] + t.subtree_sizes, dtype=np.intp)
    desc: list[Optional[_Descendants]] = []
    for u in range(len(labels)):
        if sizes[u] == 1:
            desc.append(None)
            continue
        members = np.arange(u + 1, u + sizes[u], dtype=np.intp)
        members = members[np.lexsort((starts[members], ends[members]))]
        coords = compress(np.concatenate((starts[members], ends[members])), eps)
        rs = rank(coords, starts[members], eps)
        re = rank(coords, ends[members], eps)
        groups: list[tuple[int, slice]] = []
        begin = 0
        for k in range(1, len(members) + 1):
            if k == len(members) or re[k] != re[begin]:
                groups.append((int(re[begin]), slice(begin, k)))
                begin = k
        desc.append(_Descendants(members, rs, re, len(coords), groups))
    return _FlatTree(starts, ends, labels, sizes, desc)


class _Aligner:
    """Fills f(u, v) bottom-up and backtracks one optimal alignment."""

    def __init__(self, t1: SegmentTree, t2: SegmentTree, label_mode: LabelMode):
        eps = epsilon()
        span = envelope([t1, t2])
        self.a = _flatten(t1, span.start, span.end, eps)
        self.b = _flatten(t2, span.start, span.end, eps)
        self.weights = iou_matrix(self.a.starts, self.a.ends, self.b.starts, self.b.ends)
        self.weights[0, 0] = 1.0
        if label_mode == "exact_label":
            labels1 = np.array(self.a.labels[1:], dtype=object)
            labels2 = np.array(self.b.labels[1:], dtype=object)
            allowed = np.zeros_like(self.weights, dtype=bool)
            allowed[1:, 1:] = labels1[:, None] == labels2[None, :]
            allowed[0, 0] = True
        elif label_mode == "unlabeled":
            allowed = np.ones_like(self.weights, dtype=bool)
        else:
            raise TreeAlignError(f"unknown label mode: {label_mode}")
        self.allowed = allowed
        self.f = np.zeros_like(self.weights)

    def solve(self) -> float:
        a, b = self.a, self.b
        for u in range(a.size - 1, -1, -1):
            for v in range(b.size - 1, -1, -1):
                # dummy roots only pair with each other
                if not self.allowed[u, v] or (u == 0) != (v == 0):
                    self.f[u, v] = -np.inf
                    continue
                w = self.weights[u, v]
                # disjoint nodes have disjoint descendants
                if w == 0.0 or a.desc[u] is None or b.desc[v] is None:
                    self.f[u, v] = w
                    continue
                best, _, _ = self._sequences(u, v, keep=False)
                self.f[u, v] = w + best
        logger.debug("aligned %d x %d nodes", a.size - 1, b.size - 1)
        return float(self.f[0, 0]) - 1.0

    def _sequences(self, u: int, v: int, keep: bool):
        d1 = self.a.desc[u]
        d2 = self.b.desc[v]
        g = np.zeros((d1.n_coords, d2.n_coords))
        fsub = self.f[np.ix_(d1.order, d2.order)]
        h = np.full(fsub.shape, -np.inf) if keep else None
        filled = 0
        for x, rows in d1.groups:
            if filled < x - 1:
                g[filled + 1:x] = g[filled]
            hg = fsub[rows] + g[np.ix_(d1.rs[rows], d2.rs)]
            if keep:
                h[rows] = hg
            line = np.zeros(d2.n_coords)
            np.maximum.at(line, d2.re, hg.max(axis=0))
            np.maximum.accumulate(line, out=line)
            g[x] = np.maximum(g[x - 1], line)
            filled = x
        return float(g[filled, -1]), g, h

    def backtrack(self) -> list[tuple[int, int]]:
        pairs: list[tuple[int, int]] = []
        self._collect(0, 0, pairs)
        return pairs

    def _collect(self, u: int, v: int, out: list[tuple[int, int]]) -> None:
        d1 = self.a.desc[u]
        d2 = self.b.desc[v]
        if self.weights[u, v] == 0.0 or d1 is None or d2 is None:
            return
        target, g, h = self._sequences(u, v, keep=True)
        limit1, limit2 = d1.n_coords - 1, d2.n_coords - 1
        chosen: list[tuple[int, int]] = []
        while target > 0.0:
            mask = (h == target) & (d1.re[:, None] <= limit1) & (d2.re[None, :] <= limit2)
            rows, cols = np.nonzero(mask)
            _, _, i, j = min(
                (int(d1.order[r]), int(d2.order[c]), int(r), int(c)) for r, c in zip(rows, cols)
            )
            chosen.append((int(d1.order[i]), int(d2.order[j])))
            limit1, limit2 = int(d1.rs[i]), int(d2.rs[j])
            target = float(g[limit1, limit2])
        for p, q in reversed(chosen):
            out.append((p, q))
            self._collect(p, q, out)


def _alignment_from(pairs: Sequence[tuple[int, int]], weights: np.ndarray) -> Alignment:
    kept = [
        AlignedPair(node1=p, node2=q, iou=float(weights[p, q]))
        for p, q in sorted(pairs)
        if weights[p, q] > 0.0
    ]
    return Alignment(pairs=kept, total_weight=math.fsum(pair.iou for pair in kept))


def conflicted(t1: SegmentTree, t2: SegmentTree, m1: tuple[int, int], m2: tuple[int, int]) -> bool:
    """Two matchings disagree on ancestry in the two trees."""
    (i, j), (k, l) = m1, m2
    return (
        t1.is_ancestor(i, k) != t2.is_ancestor(j, l)
        or t1.is_ancestor(k, i) != t2.is_ancestor(l, j)
    )


def check_alignment(
    t1: SegmentTree,
    t2: SegmentTree,
    alignment: Alignment,
    label_mode: LabelMode = "unlabeled",
) -> None:
    """Raise if the alignment is not one-to-one, conflict-free and consistent."""
    pairs = alignment.as_tuples()
    if len({p for p, _ in pairs}) != len(pairs) or len({q for _, q in pairs}) != len(pairs):
        raise TreeAlignError("alignment is not one-to-one")
    for x in range(len(pairs)):
        for y in range(x + 1, len(pairs)):
            if conflicted(t1, t2, pairs[x], pairs[y]):
                raise TreeAlignError(f"matchings {pairs[x]} and {pairs[y]} are conflicted")
    if label_mode == "exact_label":
        for p, q in pairs:
            if t1.nodes[p].label != t2.nodes[q].label:
                raise TreeAlignError(f"pair {(p, q)} joins different labels")
    total = math.fsum(pair.iou for pair in alignment.pairs)
    if abs(total - alignment.total_weight) > 1e-9:
        raise TreeAlignError("alignment weight does not match its pairs")


def max_alignment(
    t1: SegmentTree,
    t2: SegmentTree,
    label_mode: LabelMode = "unlabeled",
) -> Alignment:
    """Maximum IoU-weighted conflict-free alignment over the real nodes.

    Pairs with zero IoU are dropped from the output; ties resolve to the
    candidate with the smallest (preorder1, preorder2) at each backtracking
    step.
    """
    require_valid(t1, "first tree")
    require_valid(t2, "second tree")
    return _solve(t1, t2, label_mode)


def _solve(t1: SegmentTree, t2: SegmentTree, label_mode: LabelMode) -> Alignment:
    aligner = _Aligner(t1, t2, label_mode)
    objective = aligner.solve()
    flat_pairs = aligner.backtrack()
    alignment = _alignment_from(
        [(p - 1, q - 1) for p, q in flat_pairs],
        aligner.weights[1:, 1:],
    )
    if abs(alignment.total_weight - objective) > 1e-9:
        raise TreeAlignError(
            f"backtracked weight {alignment.total_weight} differs from optimum {objective}"
        )
    check_alignment(t1, t2, alignment, label_mode)
    return alignment


def oracle_alignment(
    t1: SegmentTree,
    t2: SegmentTree,
    label_mode: LabelMode = "unlabeled",
) -> Alignment:
    """Exhaustive search over one-to-one, conflict-free pair sets.

    Pairs with zero IoU are never proposed: they add no weight, and removing
    them from an alignment keeps it valid.
    """
    if t1.node_count + t2.node_count > ORACLE_MAX_NODES:
        raise OracleSizeError(
            f"exhaustive alignment is limited to {ORACLE_MAX_NODES} nodes in total, "
            f"got {t1.node_count} + {t2.node_count}"
        )
    weights = iou_matrix(
        [n.start for n in t1.nodes], [n.end for n in t1.nodes],
        [n.start for n in t2.nodes], [n.end for n in t2.nodes],
    )
    candidates = []
    for i in range(t1.node_count):
        row = []
        for j in range(t2.node_count):
            if weights[i, j] <= 0.0:
                continue
            if label_mode == "exact_label" and t1.nodes[i].label != t2.nodes[j].label:
                continue
            row.append(j)
        candidates.append(row)

    # optimistic completion of a partial alignment from node i on
    remaining = [0.0] * (t1.node_count + 1)
    for i in range(t1.node_count - 1, -1, -1):
        remaining[i] = remaining[i + 1] + max((weights[i, j] for j in candidates[i]), default=0.0)

    best_weight = 0.0
    best_pairs: list[tuple[int, int]] = []
    chosen: list[tuple[int, int]] = []
    used: set[int] = set()

    def search(i: int, weight: float) -> None:
        nonlocal best_weight, best_pairs
        if i == t1.node_count:
            if weight > best_weight + 1e-12:
                best_weight = weight
                best_pairs = list(chosen)
            return
        if weight + remaining[i] <= best_weight + 1e-12:
            return
        search(i + 1, weight)
        for j in candidates[i]:
            if j in used or any(conflicted(t1, t2, (i, j), m) for m in chosen):
                continue
            chosen.append((i, j))
            used.add(j)
            search(i + 1, weight + weights[i, j])
            used.discard(j)
            chosen.pop()

    search(0, 0.0)
    return _alignment_from(best_pairs, weights)


def struct_iou(
    t1: SegmentTree,
    t2: SegmentTree,
    label_mode: LabelMode = "unlabeled",
    include_preterminals: bool = True,
) -> StructIoUScore:
    """2 * optimal alignment weight / (n1 + n2)."""
    return explain(t1, t2, label_mode, include_preterminals)[3]


def explain(
    t1: SegmentTree,
    t2: SegmentTree,
    label_mode: LabelMode = "unlabeled",
    include_preterminals: bool = True,
) -> tuple[SegmentTree, SegmentTree, Alignment, StructIoUScore]:
    """Score plus the alignment behind it.

    Without preterminals the alignment indexes the pruned trees, which are
    returned alongside it. Validation always runs on the trees as given.
    """
    require_valid(t1, "first tree")
    require_valid(t2, "second tree")
    if not include_preterminals:
        t1, t2 = without_preterminals(t1), without_preterminals(t2)
    alignment = _solve(t1, t2, label_mode)
    n1 = count_nodes(t1)
    n2 = count_nodes(t2)
    score = StructIoUScore(
        score=2.0 * alignment.total_weight / (n1 + n2),
        n1=n1,
        n2=n2,
        weight=alignment.total_weight,
    )
    return t1, t2, alignment, score


def _score_one(args: tuple[SegmentTree, SegmentTree, LabelMode, bool]) -> StructIoUScore:
    t1, t2, label_mode, include_preterminals = args
    return struct_iou(t1, t2, label_mode, include_preterminals)


def corpus_struct_iou(
    pairs: Sequence[tuple[SegmentTree, SegmentTree]],
    label_mode: LabelMode = "unlabeled",
    include_preterminals: bool = True,
    ids: Optional[Sequence[str]] = None,
    jobs: int = 1,
) -> EvalReport:
    """Corpus Struct-IoU: sentence scores weighted by n1 + n2.

    Sentence pairs may be scored by ``jobs`` worker processes; the reduction
    always runs in corpus order.
    """
    if not pairs:
        raise CorpusError("nothing to score: empty corpus")
    if ids is not None and len(ids) != len(pairs):
        raise CorpusError(f"{len(ids)} ids for {len(pairs)} sentence pairs")
    work = [(t1, t2, label_mode, include_preterminals) for t1, t2 in pairs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(_score_one, work))
    else:
        scores = [_score_one(item) for item in work]

    ids = list(ids) if ids is not None else [str(k) for k in range(len(pairs))]
    sentences = [
        SentenceScore(id=sid, score=s.score, n1=s.n1, n2=s.n2, weight=s.weight)
        for sid, s in zip(ids, scores)
    ]
    numerator = math.fsum((s.n1 + s.n2) * s.score for s in sentences)
    denominator = sum(s.n1 + s.n2 for s in sentences)
    return EvalReport(
        metric="struct_iou",
        label_mode=label_mode,
        corpus=numerator / denominator,
        sentence_mean=math.fsum(s.score for s in sentences) / len(sentences),
        sentences=sentences,
    )


def alignment_to_json(
    t1: SegmentTree,
    t2: SegmentTree,
    alignment: Alignment,
    score: StructIoUScore,
) -> dict:
    """Alignment export; nodes are addressed by their child-index paths."""
    return {
        "score": score.score,
        "n1": score.n1,
        "n2": score.n2,
        "pairs": [
            {
                "t1_path": list(t1.paths[p.node1]),
                "t2_path": list(t2.paths[p.node2]),
                "iou": p.iou,
            }
            for p in alignment.pairs
        ],
    }
