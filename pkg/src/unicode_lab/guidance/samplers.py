"""End-to-end samplers: BoN, CoDe, gradient-only and UniCoDe.

All four share one reverse loop. Particles are held as an array of shape
``(B, N, d)``: ``B`` independent generations (``n_samples``) each with ``N``
particles. Noise for reverse step ``t`` is the ``("reverse", t)`` substream
drawn at shape ``(B, N, d)``, so runs that differ only in guidance see the
same noise, and a one-particle run reproduces :func:`sample_unguided`.

Per step ``s`` (starting at 1) the loop does: reverse step; gradient update
when ``s % block_grad == 0`` and ``t / T`` is inside the gradient window;
selection when ``s % block_sample == 0``. A final selection at ``t = 0``
returns one sample per generation.
"""

import math
import time
from dataclasses import replace

import numpy as np

from ..diffusion import reverse_step, sdedit_init, sdedit_start
from ..metrics import RunMetrics, expected_reward
from ..nfe import NfeCounters
from ..rewards import reward_on_denoised
from ..rng import as_streams
from .selection import schedule_particles, softmax_weights
from .steps import apply_gradient, clustered_gradients, grad_step, guidance_scale


def _select(x, rewards, count, selection, tau, rng):
    """Resample each generation's particles to ``count`` survivors."""
    if selection == "greedy":
        best = np.argmax(rewards, axis=1)
        return np.repeat(x[np.arange(len(x)), best][:, None, :], count, axis=1)
    probs = softmax_weights(rewards, tau)
    out = np.empty((x.shape[0], count, x.shape[2]))
    n = x.shape[1]
    for b in range(len(x)):
        out[b] = x[b, rng.choice(n, size=count, replace=True, p=probs[b])]
    return out


def _guide(x, t, step_key, cfg, prior, reward, schedule, counters, streams, conditional_prior):
    """Apply ``grad_repeats`` gradient updates to particles at timestep ``t``."""
    for r in range(cfg.grad_repeats):
        key = (*step_key, r)
        if cfg.cluster_k is not None:
            g = clustered_gradients(x, cfg.cluster_k, t, reward, prior, schedule, cfg, counters, streams, key)
        else:
            g = grad_step(x, t, reward, prior, schedule, cfg, counters, streams.generator("zoo", *key))
        scale = guidance_scale(x, g, t, cfg, prior, schedule, conditional_prior)
        x = apply_gradient(x, g, scale)
    return x


def _run(
    cfg,
    prior,
    reward,
    schedule,
    random_state,
    *,
    n_samples,
    select_blocks,
    gradient_every,
    final_selection,
    conditional_prior=None,
    reference=None,
    eta=None,
):
    started = time.perf_counter()
    streams = as_streams(random_state)
    counters = NfeCounters()
    score_fn = prior.score_fn(schedule)
    T, d = schedule.T, prior.dim

    if reference is not None and eta is None:
        raise ValueError("SDEdit initialisation needs eta")
    start_t = T if reference is None else sdedit_start(eta, T)
    gradient_on = gradient_every is not None and cfg.guidance_scale > 0

    num_blocks = max(1, math.ceil(start_t / cfg.block_sample)) if select_blocks else 1
    if cfg.particle_schedule is not None and select_blocks:
        counts = schedule_particles(cfg.particle_schedule, num_blocks)
    else:
        counts = [cfg.n_particles] * num_blocks

    if reference is None:
        x = streams.normal("init", size=(n_samples, counts[0], d))
    else:
        particles, _ = sdedit_init(reference, eta, schedule, n_samples * counts[0], streams)
        x = particles.values.reshape(n_samples, counts[0], d)

    s = 1
    for t in range(start_t, 0, -1):
        x = reverse_step(x, t, schedule, score_fn, streams.normal("reverse", t, size=x.shape))
        counters.add(denoiser_calls=x.shape[0] * x.shape[1])

        if gradient_on and s % gradient_every == 0 and cfg.in_window(t, T):
            x = _guide(x, t - 1, (t,), cfg, prior, reward, schedule, counters, streams, conditional_prior)

        if select_blocks and s % cfg.block_sample == 0:
            count = counts[min(s // cfg.block_sample, num_blocks - 1)]
            rewards = reward_on_denoised(reward, x, t - 1, schedule, score_fn, counters)
            x = _select(x, rewards, count, cfg.selection, cfg.temperature, streams.generator("select", t))
        s += 1

    final_rewards = reward.evaluate(x)
    counters.add(reward_evals=x.shape[0] * x.shape[1])
    chosen = _select(x, final_rewards, 1, final_selection, cfg.temperature, streams.generator("select", 0))[:, 0]

    mean, std = expected_reward(chosen, reward)
    metrics = RunMetrics(
        reward_mean=mean,
        reward_std=std,
        nfe=counters.per_sample(n_samples),
        wall_ms=(time.perf_counter() - started) * 1e3,
    )
    return chosen, metrics, x


def _check_sampler(cfg, expected):
    if cfg.sampler != expected:
        raise ValueError(f"config is for sampler {cfg.sampler!r}, not {expected!r}")


def _finish(out, return_particles):
    return out if return_particles else out[:2]


def run_bon(cfg, prior, reward, schedule, random_state=None, *, n_samples=1, return_particles=False, **init):
    """Best-of-N: independent unguided trajectories, keep the reward argmax."""
    _check_sampler(cfg, "bon")
    out = _run(
        cfg, prior, reward, schedule, random_state, n_samples=n_samples,
        select_blocks=False, gradient_every=None, final_selection="greedy", **init,
    )
    return _finish(out, return_particles)


def run_code(cfg, prior, reward, schedule, random_state=None, *, n_samples=1, return_particles=False, **init):
    """Blockwise selection every ``block_sample`` steps, no gradients."""
    _check_sampler(cfg, "code")
    out = _run(
        cfg, prior, reward, schedule, random_state, n_samples=n_samples,
        select_blocks=True, gradient_every=None, final_selection=cfg.selection, **init,
    )
    return _finish(out, return_particles)


def run_gradient_only(
    cfg, prior, reward, schedule, random_state=None, *, n_samples=1, conditional_prior=None,
    return_particles=False, **init,
):
    """Gradient guidance after every reverse step inside the window; no intermediate selection."""
    _check_sampler(cfg, "grad_only")
    out = _run(
        cfg, prior, reward, schedule, random_state, n_samples=n_samples,
        select_blocks=False, gradient_every=1, final_selection=cfg.selection,
        conditional_prior=conditional_prior, **init,
    )
    return _finish(out, return_particles)


def run_unicode(
    cfg, prior, reward, schedule, random_state=None, *, n_samples=1, conditional_prior=None,
    return_particles=False, **init,
):
    """Blockwise gradients every ``block_grad`` steps followed by blockwise selection."""
    _check_sampler(cfg, "unicode")
    out = _run(
        cfg, prior, reward, schedule, random_state, n_samples=n_samples,
        select_blocks=True, gradient_every=cfg.block_grad, final_selection=cfg.selection,
        conditional_prior=conditional_prior, **init,
    )
    return _finish(out, return_particles)


RUNNERS = {
    "bon": run_bon,
    "code": run_code,
    "grad_only": run_gradient_only,
    "unicode": run_unicode,
}


def run_sampler(cfg, prior, reward, schedule, random_state=None, **kwargs):
    """Dispatch on ``cfg.sampler``."""
    if cfg.sampler in ("bon", "code"):
        kwargs.pop("conditional_prior", None)
    return RUNNERS[cfg.sampler](cfg, prior, reward, schedule, random_state, **kwargs)


def with_sampler(cfg, sampler, **changes):
    return replace(cfg, sampler=sampler, **changes)
