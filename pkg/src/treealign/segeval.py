"""Word segmentation metrics and minimum Bayes risk selection."""

import logging
import math
from typing import Literal, Sequence, Union

import numpy as np
from nltk import Tree
from pydantic import BaseModel, ConfigDict, field_validator
from scipy.optimize import linear_sum_assignment

from treealign.config import epsilon
from treealign.errors import TreeAlignError
from treealign.interval import Interval, intersection_size, iou_matrix
from treealign.parseval import extract_brackets, score_pair
from treealign.tree import BoundarySequence, WordSpan
from treealign.treebank import parse_bracketed

logger = logging.getLogger(__name__)

LossKind = Literal["miou", "treef1"]


class SpanSet(BaseModel):
    """Word spans of one segmentation, sorted by start and pairwise disjoint."""
    model_config = ConfigDict(frozen=True)

    spans: tuple[Interval, ...] = ()

    @field_validator("spans")
    @classmethod
    def check_disjoint(cls, v: tuple[Interval, ...]) -> tuple[Interval, ...]:
        v = tuple(sorted(v, key=lambda i: (i.start, i.end)))
        for k in range(1, len(v)):
            if intersection_size(v[k - 1], v[k]) > 0.0:
                raise ValueError(f"spans {v[k - 1]} and {v[k]} overlap")
        return v

    @classmethod
    def of(cls, pairs: Sequence[tuple[float, float]]) -> "SpanSet":
        return cls(spans=tuple(Interval(start=s, end=e) for s, e in pairs))

    @classmethod
    def from_boundaries(cls, b: BoundarySequence) -> "SpanSet":
        return cls(spans=tuple(b.intervals()))

    @classmethod
    def from_word_spans(cls, spans: Sequence[WordSpan]) -> "SpanSet":
        return cls.of([(s.start, s.end) for s in spans])

    def internal(self) -> list[float]:
        """Word starts and ends inside the utterance; a start meeting the previous end counts once."""
        eps = epsilon()
        points: list[float] = []
        for k, span in enumerate(self.spans):
            if k > 0 and not (points and abs(span.start - points[-1]) <= eps):
                points.append(span.start)
            if k < len(self.spans) - 1:
                points.append(span.end)
        return points

    def endpoints(self) -> list[tuple[float, float]]:
        return [(i.start, i.end) for i in self.spans]

    def __len__(self) -> int:
        return len(self.spans)


Segmentation = Union[BoundarySequence, SpanSet]


class BoundaryScore(BaseModel):
    precision: float
    recall: float
    f1: float
    matched: int
    n_ref: int
    n_hyp: int


def match_boundaries(ref: Sequence[float], hyp: Sequence[float], tolerance: float) -> int:
    """Size of a maximum one-to-one matching with |ref - hyp| <= tolerance.

    Both lists must be sorted. On a threshold chain the greedy left-to-right
    sweep is maximum.
    """
    limit = tolerance + epsilon()
    i = j = matched = 0
    while i < len(ref) and j < len(hyp):
        if abs(ref[i] - hyp[j]) <= limit:
            matched += 1
            i += 1
            j += 1
        elif hyp[j] < ref[i]:
            j += 1
        else:
            i += 1
    return matched


def boundary_prf(
    ref: Segmentation,
    hyp: Segmentation,
    tolerance: float = 0.020,
) -> BoundaryScore:
    """Boundary precision/recall/F1 over internal boundaries only.

    With gapped spans both edges of a silence are boundaries.
    """
    if tolerance < 0:
        raise ValueError(f"tolerance must be non-negative, got {tolerance}")
    r = ref.internal()
    h = hyp.internal()
    if not r and not h:
        return BoundaryScore(precision=1.0, recall=1.0, f1=1.0, matched=0, n_ref=0, n_hyp=0)
    if not r or not h:
        return BoundaryScore(precision=0.0, recall=0.0, f1=0.0, matched=0, n_ref=len(r), n_hyp=len(h))
    matched = match_boundaries(r, h, tolerance)
    return BoundaryScore(
        precision=matched / len(h),
        recall=matched / len(r),
        f1=2.0 * matched / (len(r) + len(h)),
        matched=matched,
        n_ref=len(r),
        n_hyp=len(h),
    )


def segment_miou(s1: SpanSet, s2: SpanSet, strict: bool = True) -> float:
    """Mean IoU over a maximum-weight matching of the two span sets.

    ``strict`` divides by max(|s1|, |s2|) so unmatched spans count as 0;
    otherwise the mean runs over matched pairs with positive IoU only.
    """
    if not s1.spans and not s2.spans:
        return 1.0
    if not s1.spans or not s2.spans:
        return 0.0
    # fixed argument order keeps the result exactly symmetric
    if s2.endpoints() < s1.endpoints():
        s1, s2 = s2, s1
    a = np.array(s1.endpoints())
    b = np.array(s2.endpoints())
    weights = iou_matrix(a[:, 0], a[:, 1], b[:, 0], b[:, 1])
    rows, cols = linear_sum_assignment(weights, maximize=True)
    matched = sorted(float(weights[r, c]) for r, c in zip(rows, cols) if weights[r, c] > 0.0)
    total = math.fsum(matched)
    if strict:
        return total / max(len(s1), len(s2))
    return total / len(matched) if matched else 0.0


Candidate = Union[SpanSet, str, Tree]


def _kind(candidate: Candidate) -> str:
    if isinstance(candidate, SpanSet):
        return "spans"
    if isinstance(candidate, (str, Tree)):
        return "tree"
    raise TreeAlignError(f"unsupported candidate type {type(candidate).__name__}")


def mbr_risks(
    candidates: Sequence[Candidate],
    loss: LossKind = "miou",
    strict: bool = True,
    labeled: bool = False,
) -> np.ndarray:
    """Summed loss of each candidate against all candidates (itself included)."""
    if not candidates:
        raise TreeAlignError("MBR selection needs at least one candidate")
    kinds = {_kind(c) for c in candidates}
    if len(kinds) > 1:
        raise TreeAlignError("MBR candidates mix span sets and trees")
    expected = "spans" if loss == "miou" else "tree"
    if loss not in ("miou", "treef1"):
        raise TreeAlignError(f"unknown MBR loss: {loss}")
    if kinds != {expected}:
        raise TreeAlignError(f"loss {loss!r} needs {expected} candidates")

    n = len(candidates)
    losses = np.zeros((n, n))
    if loss == "miou":
        for i in range(n):
            for j in range(i, n):
                losses[i, j] = losses[j, i] = -segment_miou(candidates[i], candidates[j], strict)
    else:
        brackets = [
            extract_brackets(c if isinstance(c, Tree) else parse_bracketed(c), labeled=labeled)
            for c in candidates
        ]
        for i in range(n):
            for j in range(i, n):
                losses[i, j] = losses[j, i] = 1.0 - score_pair(brackets[i], brackets[j]).f1
    return np.array([math.fsum(row) for row in losses])


def mbr_select(
    candidates: Sequence[Candidate],
    loss: LossKind = "miou",
    strict: bool = True,
    labeled: bool = False,
) -> int:
    """Index of the candidate with the lowest summed risk; ties go to the lowest index."""
    risks = mbr_risks(candidates, loss, strict, labeled)
    best = int(np.argmin(risks))
    logger.debug("MBR picked %d of %d (risk %.6f)", best, len(candidates), risks[best])
    return best


def corpus_boundary_prf(
    refs: Sequence[Segmentation],
    hyps: Sequence[Segmentation],
    tolerance: float = 0.020,
) -> BoundaryScore:
    """Boundary scores with matches and counts pooled over utterances."""
    if len(refs) != len(hyps):
        raise TreeAlignError(f"{len(refs)} reference utterances but {len(hyps)} hypotheses")
    scores = [boundary_prf(r, h, tolerance) for r, h in zip(refs, hyps)]
    matched = sum(s.matched for s in scores)
    n_ref = sum(s.n_ref for s in scores)
    n_hyp = sum(s.n_hyp for s in scores)
    if n_ref == 0 and n_hyp == 0:
        return BoundaryScore(precision=1.0, recall=1.0, f1=1.0, matched=0, n_ref=0, n_hyp=0)
    if n_ref == 0 or n_hyp == 0:
        return BoundaryScore(precision=0.0, recall=0.0, f1=0.0, matched=0, n_ref=n_ref, n_hyp=n_hyp)
    return BoundaryScore(
        precision=matched / n_hyp,
        recall=matched / n_ref,
        f1=2.0 * matched / (n_ref + n_hyp),
        matched=matched,
        n_ref=n_ref,
        n_hyp=n_hyp,
    )
