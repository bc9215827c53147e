"""Configuration management using Pydantic."""

from functools import lru_cache
from pathlib import Path
from typing import Literal, Optional
import yaml
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

LabelMode = Literal["unlabeled", "exact_label"]
Unit = Literal["seconds", "word_index", "char_index"]

# EVALB's default DELETE_LABEL list
DEFAULT_PUNCT_LABELS = [",", ":", "``", "''", ".", "-NONE-"]


class EvalConfig(BaseModel):
    """Evaluation configuration, echoed into every report."""
    label_mode: LabelMode = "unlabeled"
    include_preterminals: bool = True
    strip_function_tags: bool = False
    unwrap_empty_root: bool = True
    case_insensitive: bool = False
    unit: Literal["word", "char"] = "word"
    tolerance: float = Field(default=0.020, ge=0.0)
    miou_strict: bool = True
    labeled_parseval: bool = True
    parseval_include_preterminals: bool = False
    ignore_punct: bool = False
    punct_labels: list[str] = Field(default_factory=lambda: list(DEFAULT_PUNCT_LABELS))
    jobs: int = Field(default=1, ge=1)
    skip_invalid: bool = False
    seed: int = 0
    bootstrap_resamples: int = 2000
    ci_alpha: float = 0.05

    @classmethod
    def from_yaml(cls, path: Path) -> "EvalConfig":
        """Load configuration from YAML file."""
        path = Path(path).resolve()
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
        return cls(**data)

    def with_overrides(self, **overrides) -> "EvalConfig":
        """Return a copy with every non-None override applied."""
        update = {k: v for k, v in overrides.items() if v is not None}
        return self.model_validate({**self.model_dump(), **update})

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return self.model_dump()


class PerturbConfig(BaseModel):
    """Perturbation sweep configuration."""
    kind: Literal["noise", "insert", "delete"] = "noise"
    deltas: list[float] = Field(default_factory=lambda: [0.0, 0.1, 0.5, 0.9])
    n_seeds: int = Field(default=5, ge=1)
    seed: int = 0

    @classmethod
    def from_yaml(cls, path: Path) -> "PerturbConfig":
        with open(Path(path).resolve(), "r") as f:
            data = yaml.safe_load(f) or {}
        return cls(**data)


class Settings(BaseSettings):
    """Environment settings."""
    epsilon: float = Field(default=1e-9, gt=0.0)

    model_config = SettingsConfigDict(
        env_prefix="TREEALIGN_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()


def epsilon() -> float:
    """Coordinate epsilon used by every equality/ordering comparison."""
    return get_settings().epsilon


def load_config(path: Optional[Path]) -> EvalConfig:
    """Load an evaluation preset, or the defaults when no path is given."""
    if path is None:
        return EvalConfig()
    return EvalConfig.from_yaml(path)
