"""Open-interval arithmetic underlying every metric.

All comparisons are epsilon-aware (``TREEALIGN_EPSILON``, default 1e-9):
two endpoints closer than epsilon are the same point, and an overlap
shorter than epsilon is no overlap.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from treealign.config import epsilon


class Interval(BaseModel):
    """Real-valued open interval (start, end) with start < end."""
    model_config = ConfigDict(frozen=True)

    start: float
    end: float

    @model_validator(mode="after")
    def check_positive_length(self) -> "Interval":
        if not self.end - self.start > epsilon():
            raise ValueError(
                f"interval ({self.start}, {self.end}) has non-positive length"
            )
        return self

    @classmethod
    def of(cls, start: float, end: float) -> "Interval":
        return cls(start=start, end=end)

    def __repr__(self) -> str:
        return f"Interval({self.start!r}, {self.end!r})"

    def __str__(self) -> str:
        return f"({self.start}, {self.end})"


def length(i: Interval) -> float:
    return i.end - i.start


def intersection_size(i1: Interval, i2: Interval) -> float:
    """Length of the overlap of two open intervals (0 when disjoint)."""
    overlap = min(i1.end, i2.end) - max(i1.start, i2.start)
    return overlap if overlap > epsilon() else 0.0


def union_size(i1: Interval, i2: Interval) -> float:
    return length(i1) + length(i2) - intersection_size(i1, i2)


def iou(i1: Interval, i2: Interval) -> float:
    """Intersection over union ratio, in [0, 1] and symmetric."""
    inter = intersection_size(i1, i2)
    if inter == 0.0:
        return 0.0
    return inter / (length(i1) + length(i2) - inter)


def disjoint(i1: Interval, i2: Interval) -> bool:
    return intersection_size(i1, i2) == 0.0


def same_interval(i1: Interval, i2: Interval) -> bool:
    eps = epsilon()
    return abs(i1.start - i2.start) <= eps and abs(i1.end - i2.end) <= eps


def contains(outer: Interval, inner: Interval) -> bool:
    eps = epsilon()
    return outer.start <= inner.start + eps and inner.end <= outer.end + eps


def iou_matrix(
    starts1: np.ndarray,
    ends1: np.ndarray,
    starts2: np.ndarray,
    ends2: np.ndarray,
) -> np.ndarray:
    """Pairwise IoU between two interval lists, same arithmetic as ``iou``."""
    s1 = np.asarray(starts1, dtype=np.float64)[:, None]
    e1 = np.asarray(ends1, dtype=np.float64)[:, None]
    s2 = np.asarray(starts2, dtype=np.float64)[None, :]
    e2 = np.asarray(ends2, dtype=np.float64)[None, :]
    inter = np.minimum(e1, e2) - np.maximum(s1, s2)
    inter = np.where(inter > epsilon(), inter, 0.0)
    union = (e1 - s1) + (e2 - s2) - inter
    return np.where(inter > 0.0, inter / union, 0.0)


def compress(values, eps: float | None = None) -> np.ndarray:
    """Sorted distinct coordinates, merging points closer than epsilon."""
    eps = epsilon() if eps is None else eps
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    if ordered.size == 0:
        return ordered
    keep = np.concatenate(([True], np.diff(ordered) > eps))
    return ordered[keep]


def rank(coords: np.ndarray, values, eps: float | None = None) -> np.ndarray:
    """Index of each value in ``coords`` (output of ``compress``)."""
    eps = epsilon() if eps is None else eps
    idx = np.searchsorted(coords, np.asarray(values, dtype=np.float64) - eps, side="left")
    return idx.astype(np.intp)
