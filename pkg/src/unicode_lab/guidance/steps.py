"""Gradient guidance on Tweedie-denoised rewards."""

import numpy as np

from ..diffusion import tweedie_denoise
from ..rewards import zero_order_gradient
from .kmeans import kmeans_cluster


def _n_states(x):
    return int(np.prod(x.shape[:-1]))


def grad_step(x, t, reward, prior, schedule, cfg, counters=None, rng=None):
    """Gradient of ``reward(tweedie(x))`` with respect to ``x`` at timestep ``t``.

    Analytic mode chains the reward gradient through the closed-form Tweedie
    Jacobian of the mixture prior (one gradient evaluation per state).
    Zero-order mode perturbs ``x`` itself and costs ``2 * n_probes``
    evaluations per state, counted both as reward and gradient evaluations.
    """
    x = np.asarray(x, dtype=float)
    if cfg.grad_mode == "analytic":
        x0 = tweedie_denoise(x, t, schedule, prior.score_fn(schedule))
        reward_grad = reward.gradient(x0)
        jac = prior.tweedie_jacobian(x, t, schedule)
        g = np.einsum("...ij,...j->...i", jac, reward_grad)
        if counters is not None:
            counters.add(gradient_evals=_n_states(x))
        return g

    score_fn = prior.score_fn(schedule)
    composite = lambda y: reward.evaluate(tweedie_denoise(y, t, schedule, score_fn))  # noqa: E731
    if rng is None:
        rng = np.random.default_rng(0)
    g = zero_order_gradient(composite, x, cfg.zoo, rng, counters)
    if counters is not None:
        counters.add(gradient_evals=2 * cfg.zoo.n_probes * _n_states(x))
    return g


def apply_gradient(x, g, scale):
    """``x + scale * g``; ``scale`` may be a scalar or broadcast per particle."""
    return np.asarray(x, dtype=float) + np.asarray(scale, dtype=float) * np.asarray(g, dtype=float)


def rescale_guidance(grad, correction, scale_cfg, scale_grad, eps=1e-8, clamp=None):
    """``||correction|| * scale_cfg * scale_grad / (||grad|| + eps)``, optionally clamped.

    Norms are taken over the last axis, so stacked particles get one scale each.
    """
    grad_norm = np.linalg.norm(np.asarray(grad, dtype=float), axis=-1)
    corr_norm = np.linalg.norm(np.asarray(correction, dtype=float), axis=-1)
    scale = corr_norm * scale_cfg * scale_grad / (grad_norm + eps)
    if clamp is not None:
        scale = np.minimum(scale, clamp)
    return scale


def guidance_scale(x, g, t, cfg, prior, schedule, conditional_prior=None):
    """Per-particle step size, shape ``x.shape[:-1] + (1,)`` or a scalar."""
    if cfg.rescale_mode == "fixed":
        return cfg.guidance_scale
    if conditional_prior is None:
        raise ValueError("rescale_mode='cfg_rescaled' needs a conditional prior")
    abar = schedule.alpha_bar(t)
    correction = conditional_prior.score_at(x, abar) - prior.score_at(x, abar)
    scale = rescale_guidance(g, correction, cfg.scale_cfg, cfg.guidance_scale, clamp=cfg.clamp)
    return scale[..., None]


def clustered_gradients(x, K, t, reward, prior, schedule, cfg, counters=None, streams=None, key=()):
    """One gradient per k-means cluster, shared by all its members.

    ``x`` has shape ``(N, d)`` or ``(B, N, d)``; each of the ``B`` groups is
    clustered separately. Gradients are evaluated at the centroids, so the
    gradient count grows with the number of clusters rather than ``N``.
    """
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 2
    xb = x[None] if squeeze else x
    kmeans_rng = streams.generator("kmeans", *key) if streams is not None else np.random.default_rng(0)
    assignments, centroids, offsets = [], [], [0]
    for group in xb:
        assign, cents = kmeans_cluster(group, K, cfg.kmeans_iters, kmeans_rng)
        assignments.append(assign)
        centroids.append(cents)
        offsets.append(offsets[-1] + len(cents))
    stacked = np.concatenate(centroids, axis=0)
    zoo_rng = streams.generator("zoo", *key) if streams is not None else None
    g_centroids = grad_step(stacked, t, reward, prior, schedule, cfg, counters, zoo_rng)
    out = np.empty_like(xb)
    for b, assign in enumerate(assignments):
        out[b] = g_centroids[offsets[b] + assign]
    return out[0] if squeeze else out
