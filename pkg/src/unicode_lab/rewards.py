"""Reward models and gradient estimation.

Rewards map states of shape ``(..., d)`` to values of shape ``(...)``. A
reward without an analytic gradient says so explicitly: calling
:meth:`RewardModel.gradient` raises :class:`GradientUnavailableError` so the
caller has to opt into zero-order estimation.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._validation import check_int, check_positive, check_vector
from .diffusion import tweedie_denoise
from .exceptions import GradientUnavailableError


@dataclass(frozen=True)
class RewardModel:
    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    analytic_gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    dim: Optional[int] = None

    def __call__(self, x):
        return self.evaluate(np.asarray(x, dtype=float))

    @property
    def has_gradient(self):
        return self.analytic_gradient is not None

    def gradient(self, x):
        if self.analytic_gradient is None:
            raise GradientUnavailableError(f"reward {self.name!r} has no analytic gradient")
        return self.analytic_gradient(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ZooConfig:
    """Zero-order estimator settings: perturbation scale and probe count."""

    sigma: float = 0.1
    n_probes: int = 10

    def __post_init__(self):
        object.__setattr__(self, "sigma", check_positive(self.sigma, "zoo.sigma"))
        object.__setattr__(self, "n_probes", check_int(self.n_probes, "zoo.n_probes", min_val=1))


def linear_reward(a):
    a = check_vector(a, "a")
    if not np.any(a):
        raise ValueError("linear reward direction must be nonzero")
    return RewardModel(
        name="linear",
        evaluate=lambda x: x @ a,
        analytic_gradient=lambda x: np.broadcast_to(a, x.shape).copy(),
        dim=a.size,
    )


def target_reward(target, scale=1.0):
    """``-scale * ||x - target||^2``; maximal at ``target``."""
    target = check_vector(target, "target")
    scale = check_positive(scale, "scale")
    return RewardModel(
        name="target",
        evaluate=lambda x: -scale * np.sum((x - target) ** 2, axis=-1),
        analytic_gradient=lambda x: -2.0 * scale * (x - target),
        dim=target.size,
    )


def quantized_reward(base, step):
    """Floor ``base`` onto a lattice of spacing ``step``; no gradient."""
    step = check_positive(step, "step")
    return RewardModel(
        name=f"quantized({base.name})",
        evaluate=lambda x: step * np.floor(base.evaluate(x) / step),
        dim=base.dim,
    )


def weighted_sum_reward(gamma1, r1, gamma2, r2):
    if r1.dim is not None and r2.dim is not None and r1.dim != r2.dim:
        raise ValueError(f"rewards disagree on dimension: {r1.dim} vs {r2.dim}")
    gamma1, gamma2 = float(gamma1), float(gamma2)
    grad = None
    if r1.has_gradient and r2.has_gradient:
        grad = lambda x: gamma1 * r1.analytic_gradient(x) + gamma2 * r2.analytic_gradient(x)  # noqa: E731
    return RewardModel(
        name=f"{gamma1:g}*{r1.name}+{gamma2:g}*{r2.name}",
        evaluate=lambda x: gamma1 * r1.evaluate(x) + gamma2 * r2.evaluate(x),
        analytic_gradient=grad,
        dim=r1.dim if r1.dim is not None else r2.dim,
    )


def reward_on_denoised(reward, x, t, schedule, score_fn, counters=None):
    """Reward of the Tweedie estimate of the clean sample.

    Adds one reward evaluation per state in ``x`` to ``counters``.
    """
    x = np.asarray(x, dtype=float)
    values = reward.evaluate(tweedie_denoise(x, t, schedule, score_fn))
    if counters is not None:
        counters.add(reward_evals=int(np.prod(x.shape[:-1])))
    return values


def zero_order_gradient(f, x, cfg, rng, counters=None, *, probes=None):
    """Antithetic Gaussian-smoothing gradient estimate using only evaluations of ``f``.

    ``f`` may be a :class:`RewardModel` or any callable on ``(..., d)``.
    Probes are drawn from ``rng`` with shape ``(n_probes, *x.shape)``
    unless injected. Every state costs ``2 * n_probes`` evaluations.
    """
    x = np.asarray(x, dtype=float)
    evaluate = f.evaluate if isinstance(f, RewardModel) else f
    if probes is None:
        probes = rng.standard_normal((cfg.n_probes, *x.shape))
    else:
        probes = np.asarray(probes, dtype=float).reshape((cfg.n_probes, *x.shape))
    sigma = cfg.sigma
    plus = evaluate(x + sigma * probes)
    minus = evaluate(x - sigma * probes)
    coef = (plus - minus) / (2.0 * sigma)
    grad = np.mean(coef[..., None] * probes, axis=0)
    if counters is not None:
        counters.add(reward_evals=2 * cfg.n_probes * int(np.prod(x.shape[:-1])))
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("zero-order gradient produced non-finite values")
    return grad
