"""Report records shared by the scorers, the CLI and ingest."""

from typing import Optional

from pydantic import BaseModel, Field


class SentenceScore(BaseModel):
    """Struct-IoU of one gold/predicted pair."""
    id: str
    score: float
    n1: int
    n2: int
    weight: float


class EvalReport(BaseModel):
    """Per-sentence and corpus-level scores with the counts used to pool them."""
    metric: str = "struct_iou"
    label_mode: str = "unlabeled"
    corpus: float
    sentence_mean: float
    sentences: list[SentenceScore] = Field(default_factory=list)
    sentence_mean_ci: Optional[tuple[float, float, float]] = None

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)
