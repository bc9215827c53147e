"""Reproducible studies built on the metrics: syntactic ambiguity and
boundary-perturbation robustness."""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from nltk import Tree
from pydantic import BaseModel

from treealign.align import corpus_struct_iou, struct_iou
from treealign.config import LabelMode
from treealign.parseval import tree_f1
from treealign.perturb import PerturbKind, perturb_tree, utterance_rng
from treealign.stats import mean_std
from treealign.tree import BoundarySequence, SegmentTree, attach_boundaries, project_text

logger = logging.getLogger(__name__)


def random_binary_bracketing(
    tags: Sequence[str],
    rng: np.random.Generator,
    words: Optional[Sequence[str]] = None,
    label: str = "X",
) -> Tree:
    """Random binary tree: repeatedly merge a random adjacent pair of groups."""
    if not tags:
        raise ValueError("cannot bracket an empty sentence")
    words = list(words) if words is not None else [tag.lower() for tag in tags]
    groups: list[Tree] = [Tree(tag, [word]) for tag, word in zip(tags, words)]
    if len(groups) == 1:
        return Tree(label, groups)
    while len(groups) > 1:
        k = int(rng.integers(len(groups) - 1))
        groups[k:k + 2] = [Tree(label, [groups[k], groups[k + 1]])]
    return groups[0]


def _np() -> Tree:
    return Tree("NP", [Tree("N", ["n"])])


def _pp(obj: Tree) -> Tree:
    return Tree("PP", [Tree("P", ["p"]), obj])


def attachment_parses(n: int) -> tuple[Tree, Tree]:
    """The two extreme plausible parses of ``N (P N){n}``.

    The first attaches every PP to the closest NP, the second stacks every
    PP on the leftmost NP.
    """
    if n < 1:
        raise ValueError("need at least one prepositional phrase")

    def closest(k: int) -> Tree:
        return _np() if k == 0 else Tree("NP", [_np(), _pp(closest(k - 1))])

    def leftmost(k: int) -> Tree:
        return _np() if k == 0 else Tree("NP", [leftmost(k - 1), _pp(_np())])

    return closest(n), leftmost(n)


class AmbiguityResult(BaseModel):
    n: int
    n_random: int
    plausible_f1: float
    plausible_struct_iou: float
    random_f1: float
    random_struct_iou: float


def ambiguity_study(
    n: int,
    n_random: int = 100,
    seed: int = 0,
    label_mode: LabelMode = "unlabeled",
) -> AmbiguityResult:
    """Unlabeled F1 and Struct-IoU of the closest-attachment parse against
    the alternative plausible parse and against random binary trees."""
    gold, alternative = attachment_parses(n)
    gold_tree = project_text(gold)
    tags = [tag for _, tag in gold.pos()]

    rng = np.random.default_rng(seed)
    f1s, ious = [], []
    for _ in range(n_random):
        guess = random_binary_bracketing(tags, rng, words=gold.leaves())
        f1s.append(tree_f1(gold, guess))
        ious.append(struct_iou(gold_tree, project_text(guess), label_mode).score)

    return AmbiguityResult(
        n=n,
        n_random=n_random,
        plausible_f1=tree_f1(gold, alternative),
        plausible_struct_iou=struct_iou(gold_tree, project_text(alternative), label_mode).score,
        random_f1=math.fsum(f1s) / n_random if n_random else 0.0,
        random_struct_iou=math.fsum(ious) / n_random if n_random else 0.0,
    )


def synthetic_utterance(
    n_words: int,
    rng: np.random.Generator,
    min_duration: float = 0.1,
    max_duration: float = 0.6,
) -> SegmentTree:
    """Random binary tree over ``n_words`` words with random durations."""
    durations = rng.uniform(min_duration, max_duration, size=n_words)
    boundaries = np.concatenate(([0.0], np.cumsum(durations)))
    words = [f"w{k}" for k in range(n_words)]
    parse = random_binary_bracketing(["W"] * n_words, rng, words=words)
    return attach_boundaries(parse, BoundarySequence.from_boundaries(boundaries.tolist(), words))


class SweepPoint(BaseModel):
    delta: float
    mean: float
    std: float
    per_seed: list[float]


def perturbation_sweep(
    pairs: Sequence[tuple[SegmentTree, SegmentTree]],
    kind: PerturbKind,
    deltas: Sequence[float],
    n_seeds: int = 5,
    seed: int = 0,
    label_mode: LabelMode = "unlabeled",
) -> list[SweepPoint]:
    """Corpus Struct-IoU after perturbing each predicted tree, per delta.

    Replicate ``s`` perturbs utterance ``k`` with ``utterance_rng(seed + s, k)``;
    gold trees are never touched.
    """
    if kind == "delete":
        raise ValueError("delete sweeps need an external re-parser")
    points = []
    for delta in deltas:
        per_seed = []
        for s in range(n_seeds):
            perturbed = [
                (gold, perturb_tree(pred, kind, delta, utterance_rng(seed + s, k)))
                for k, (gold, pred) in enumerate(pairs)
            ]
            per_seed.append(corpus_struct_iou(perturbed, label_mode).corpus)
        mean, std = mean_std(per_seed)
        logger.info("%s delta=%.2f: %.4f +/- %.4f", kind, delta, mean, std)
        points.append(SweepPoint(delta=delta, mean=mean, std=std, per_seed=per_seed))
    return points


def synthetic_corpus(
    n_utterances: int,
    min_words: int = 10,
    max_words: int = 20,
    seed: int = 0,
) -> list[tuple[SegmentTree, SegmentTree]]:
    """Gold/prediction pairs where the prediction is a copy of the gold tree."""
    rng = np.random.default_rng(seed)
    trees = [
        synthetic_utterance(int(rng.integers(min_words, max_words + 1)), rng)
        for _ in range(n_utterances)
    ]
    return [(t, t) for t in trees]
