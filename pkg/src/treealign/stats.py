"""Statistical helpers: bootstrap CIs, seed averages and rank correlation."""

import math
from typing import Optional, Sequence

import numpy as np
from scipy import stats


def bootstrap_ci(
    values: Sequence[float],
    n_resamples: int = 2000,
    alpha: float = 0.05,
    random_seed: Optional[int] = None,
) -> tuple[float, float, float]:
    """
    Compute a percentile bootstrap confidence interval for the mean.

    Args:
        values: Metric values (one per sentence)
        n_resamples: Number of bootstrap resamples
        alpha: Significance level (e.g., 0.05 for 95% CI)
        random_seed: Random seed for reproducibility

    Returns:
        (mean, ci_low, ci_high)
    """
    if len(values) == 0:
        return 0.0, 0.0, 0.0

    values = np.asarray(values, dtype=np.float64)
    mean = math.fsum(values) / len(values)

    rng = np.random.default_rng(random_seed)
    samples = rng.choice(values, size=(n_resamples, len(values)), replace=True)
    resampled_means = samples.mean(axis=1)

    ci_low = np.percentile(resampled_means, 100 * alpha / 2)
    ci_high = np.percentile(resampled_means, 100 * (1 - alpha / 2))
    return float(mean), float(ci_low), float(ci_high)


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation (0 for a single value)."""
    if len(values) == 0:
        raise ValueError("mean of no values")
    arr = np.asarray(values, dtype=np.float64)
    return float(math.fsum(arr) / len(arr)), float(arr.std())


def bucket_correlation(
    a: Sequence[float],
    b: Sequence[float],
    bucket_size: int = 10,
    random_seed: Optional[int] = None,
) -> dict:
    """
    Spearman correlation between two per-sentence metrics after averaging
    buckets of ``bucket_size`` sentences (a trailing partial bucket is
    dropped). With ``random_seed`` the sentences are shuffled first so each
    bucket is a random sample; without it buckets are consecutive.

    Returns:
        Dictionary with rho, p_value and the number of buckets
    """
    if len(a) != len(b):
        raise ValueError(f"metric lists differ in length: {len(a)} vs {len(b)}")
    if bucket_size < 1:
        raise ValueError("bucket_size must be positive")
    n_buckets = len(a) // bucket_size
    if n_buckets < 3:
        raise ValueError(
            f"need at least 3 buckets of {bucket_size} sentences, got {len(a)} sentences"
        )
    order = np.arange(len(a))
    if random_seed is not None:
        order = np.random.default_rng(random_seed).permutation(len(a))
    usable = order[:n_buckets * bucket_size]
    xa = np.asarray(a, dtype=np.float64)[usable].reshape(n_buckets, bucket_size).mean(axis=1)
    xb = np.asarray(b, dtype=np.float64)[usable].reshape(n_buckets, bucket_size).mean(axis=1)
    result = stats.spearmanr(xa, xb)
    return {
        "rho": float(result.statistic),
        "p_value": float(result.pvalue),
        "n_buckets": n_buckets,
    }
