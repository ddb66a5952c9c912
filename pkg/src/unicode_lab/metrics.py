"""Reward, divergence and compute metrics with exact oracles."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist

from ._validation import check_positive, check_vector
from .exceptions import UnsupportedPriorError
from .nfe import NfeCounters


@dataclass
class RunMetrics:
    reward_mean: float
    reward_std: float
    mmd2: Optional[float] = None
    tilt_mean_error: Optional[float] = None
    nfe: NfeCounters = field(default_factory=NfeCounters)
    wall_ms: Optional[float] = None


@dataclass(frozen=True)
class TiltedGaussian:
    mean: np.ndarray
    variance: float

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError("tilted variance must be positive")


def expected_reward(samples, reward):
    """Mean and population standard deviation of the reward over ``samples``."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if len(samples) == 0:
        raise ValueError("expected_reward needs at least one sample")
    values = np.asarray(reward.evaluate(samples), dtype=float)
    return float(values.mean()), float(values.std())


def median_bandwidth(*sample_sets):
    """Median pairwise Euclidean distance of the pooled samples."""
    pooled = np.concatenate([np.atleast_2d(np.asarray(s, dtype=float)) for s in sample_sets], axis=0)
    if len(pooled) < 2:
        return 1.0
    med = float(np.median(pdist(pooled)))
    return med if med > 0 else 1.0


def _as_2d(x):
    x = np.asarray(x, dtype=float)
    return x[:, None] if x.ndim == 1 else x


def mmd2_rbf(xs, ys, bandwidth=None):
    """Biased (V-statistic) squared MMD with kernel ``exp(-|a-b|^2 / (2 h^2))``.

    ``bandwidth=None`` uses the median heuristic on the pooled sample.
    """
    xs, ys = _as_2d(xs), _as_2d(ys)
    if len(xs) == 0 or len(ys) == 0:
        raise ValueError("mmd2_rbf needs non-empty sample sets")
    h = median_bandwidth(xs, ys) if bandwidth is None else check_positive(bandwidth, "bandwidth")
    gamma = 1.0 / (2.0 * h * h)
    kxx = np.exp(-gamma * cdist(xs, xs, "sqeuclidean")).mean()
    kyy = np.exp(-gamma * cdist(ys, ys, "sqeuclidean")).mean()
    kxy = np.exp(-gamma * cdist(xs, ys, "sqeuclidean")).mean()
    return float(max(kxx + kyy - 2.0 * kxy, 0.0))


def tilted_oracle(prior, a, lam):
    """Exponential tilt ``p(x) exp(lam * a.x)`` of a single isotropic Gaussian."""
    if not prior.is_single:
        raise UnsupportedPriorError("the tilted oracle is only defined for single-Gaussian priors")
    a = check_vector(a, "a", dim=prior.dim)
    lam = check_positive(lam, "lambda", allow_zero=True)
    var = float(prior.variances[0])
    return TiltedGaussian(prior.means[0] + lam * var * a, var)


def tilt_mean_error(sample_mean, prior, a):
    """Distance from ``sample_mean`` to the family of tilted-oracle means.

    The tilt strength is fitted by projection onto ``+a`` (clamped at zero),
    so the value measures drift that no linear-reward tilt explains.
    """
    if not prior.is_single:
        return None
    a = check_vector(a, "a", dim=prior.dim)
    mu, var = prior.means[0], float(prior.variances[0])
    lam = max(0.0, float(a @ (np.asarray(sample_mean) - mu)) / (var * float(a @ a)))
    return float(np.linalg.norm(sample_mean - tilted_oracle(prior, a, lam).mean))


NORMALIZED_FIELDS = ("reward_mean", "reward_std", "mmd2", "wall_ms", "nfe_denoiser", "nfe_reward", "nfe_grad")


@dataclass
class NormalizedReport:
    """Ratios against a baseline; fields the baseline cannot normalize keep their raw value."""

    values: dict
    non_normalizable: frozenset

    def __getitem__(self, key):
        return self.values[key]

    def format(self, key):
        v = self.values[key]
        if v is None:
            return ""
        return f"{v!r}*" if key in self.non_normalizable else repr(v)


def _flatten(metrics):
    return {
        "reward_mean": metrics.reward_mean,
        "reward_std": metrics.reward_std,
        "mmd2": metrics.mmd2,
        "wall_ms": metrics.wall_ms,
        "nfe_denoiser": metrics.nfe.denoiser_calls,
        "nfe_reward": metrics.nfe.reward_evals,
        "nfe_grad": metrics.nfe.gradient_evals,
    }


def normalize_report(metrics, baseline):
    """Divide every scalar by the baseline's value.

    A zero, missing or non-finite baseline field cannot be normalized; the
    raw value is kept and the field is listed in ``non_normalizable``.
    """
    raw, base = _flatten(metrics), _flatten(baseline)
    values, flagged = {}, set()
    for key in NORMALIZED_FIELDS:
        v, b = raw[key], base[key]
        if v is None:
            values[key] = None
        elif b is None or b == 0 or not math.isfinite(b):
            values[key] = float(v)
            flagged.add(key)
        else:
            values[key] = float(v) / float(b)
    return NormalizedReport(values, frozenset(flagged))


__all__ = [
    "NormalizedReport",
    "RunMetrics",
    "TiltedGaussian",
    "expected_reward",
    "median_bandwidth",
    "mmd2_rbf",
    "normalize_report",
    "tilt_mean_error",
    "tilted_oracle",
]
