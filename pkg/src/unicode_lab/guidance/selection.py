"""Particle selection: softmax weights, multinomial and greedy resampling."""

import numpy as np
from scipy.special import softmax

from .._validation import check_int, check_positive
from ..diffusion import ParticleSet


def softmax_weights(rewards, tau):
    """``exp(r_n / tau) / sum_j exp(r_j / tau)`` over the last axis."""
    tau = check_positive(tau, "temperature")
    rewards = np.asarray(rewards, dtype=float)
    if not np.all(np.isfinite(rewards)):
        raise ValueError("rewards must be finite")
    return softmax(rewards / tau, axis=-1)


def multinomial_indices(probs, count, rng):
    probs = np.asarray(probs, dtype=float)
    if count == 0:
        return np.empty(0, dtype=np.int64)
    return rng.choice(probs.size, size=count, replace=True, p=probs)


def greedy_indices(rewards, count):
    """``count`` copies of the argmax; ties go to the lowest index."""
    rewards = np.asarray(rewards, dtype=float)
    if rewards.size == 0:
        raise ValueError("cannot select from an empty particle set")
    return np.full(count, int(np.argmax(rewards)), dtype=np.int64)


def resample_multinomial(particles, probs, count, rng):
    """Draw ``count`` particles i.i.d. with replacement according to ``probs``."""
    probs = np.asarray(probs, dtype=float)
    count = check_int(count, "count", min_val=0)
    if probs.shape != (len(particles),):
        raise ValueError(f"expected {len(particles)} probabilities, got shape {probs.shape}")
    if abs(probs.sum() - 1.0) > 1e-9 or np.any(probs < 0):
        raise ValueError("probs must be a probability vector")
    idx = multinomial_indices(probs, count, rng)
    return ParticleSet(particles.values[idx], particles.t, np.arange(count))


def select_greedy(particles, rewards, count):
    rewards = np.asarray(rewards, dtype=float)
    if len(particles) == 0:
        raise ValueError("cannot select from an empty particle set")
    if rewards.shape != (len(particles),):
        raise ValueError(f"expected {len(particles)} rewards, got shape {rewards.shape}")
    idx = greedy_indices(rewards, check_int(count, "count", min_val=0))
    return ParticleSet(particles.values[idx], particles.t, np.arange(len(idx)))


def argmax_probability(rewards, tau):
    """Exact probability that one multinomial draw picks the reward argmax."""
    w = softmax_weights(rewards, tau)
    return float(w[int(np.argmax(rewards))])


def schedule_particles(schedule, num_blocks):
    """Map a particle schedule onto ``num_blocks`` selection blocks.

    Block ``i`` gets ``schedule[floor(i * len(schedule) / num_blocks)]``.
    """
    schedule = list(schedule)
    if not schedule:
        raise ValueError("particle schedule must be non-empty")
    num_blocks = check_int(num_blocks, "num_blocks", min_val=1)
    m = len(schedule)
    return [int(schedule[(i * m) // num_blocks]) for i in range(num_blocks)]
