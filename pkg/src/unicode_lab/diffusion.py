"""Discrete DDPM machinery on analytic Gaussian-mixture priors.

Timesteps run ``t = 0..T`` with ``t = 0`` the clean sample. Schedule arrays
are stored 0-based but every public accessor takes the 1-based ``t``.
Arrays of states have shape ``(..., d)``; all functions broadcast over the
leading axes so a whole particle population is handled in one call.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp, softmax

from ._validation import (
    check_int,
    check_open_unit,
    check_points,
    check_timestep,
    check_vector,
)
from .rng import as_streams


@dataclass(frozen=True)
class NoiseSchedule:
    """Variance schedule ``beta_t`` with derived ``alpha_t`` and ``alpha_bar_t``."""

    betas: np.ndarray
    alphas: np.ndarray = field(init=False, repr=False)
    alpha_bars: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=float)
        if betas.ndim != 1 or betas.size < 1:
            raise ValueError("betas must be a non-empty 1-D sequence")
        if np.any(betas <= 0.0) or np.any(betas >= 1.0):
            raise ValueError("every beta must lie in (0, 1)")
        alphas = 1.0 - betas
        for name, value in (("betas", betas), ("alphas", alphas), ("alpha_bars", np.cumprod(alphas))):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def T(self):
        return self.betas.size

    def beta(self, t):
        return self.betas[check_timestep(t, self.T) - 1]

    def alpha(self, t):
        return self.alphas[check_timestep(t, self.T) - 1]

    def alpha_bar(self, t):
        """``alpha_bar_t``; ``alpha_bar_0 = 1`` by convention."""
        t = check_timestep(t, self.T, allow_zero=True)
        return 1.0 if t == 0 else self.alpha_bars[t - 1]


def make_linear_schedule(T, beta_start, beta_end):
    """Betas linearly spaced from ``beta_start`` to ``beta_end`` inclusive."""
    T = check_int(T, "T", min_val=1)
    beta_start = check_open_unit(beta_start, "beta_start")
    beta_end = check_open_unit(beta_end, "beta_end")
    if beta_start > beta_end:
        raise ValueError(f"beta_start ({beta_start}) must not exceed beta_end ({beta_end})")
    return NoiseSchedule(np.linspace(beta_start, beta_end, T))


def default_schedule(T):
    """The standard 1e-4..0.02 linear schedule, rescaled by ``1000 / T``.

    At ``T = 1000`` this is exactly the usual DDPM schedule; for shorter
    chains the rescaling keeps ``alpha_bar_T`` close to zero so the reverse
    process can start from ``N(0, I)``.
    """
    T = check_int(T, "T", min_val=1)
    scale = 1000.0 / T
    beta_end = min(0.02 * scale, 0.999)
    beta_start = min(1e-4 * scale, beta_end)
    return make_linear_schedule(T, beta_start, beta_end)


@dataclass(frozen=True)
class StateVector:
    values: np.ndarray
    t: int

    def __post_init__(self):
        object.__setattr__(self, "values", check_vector(self.values, "values"))
        if int(self.t) < 0:
            raise ValueError("t must be non-negative")


@dataclass
class ParticleSet:
    """``N`` particles at a common timestep, one substream tag per particle."""

    values: np.ndarray
    t: int
    substream_ids: np.ndarray = None

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.ndim != 2:
            raise ValueError("particle values must have shape (N, d)")
        if self.substream_ids is None:
            self.substream_ids = np.arange(len(self.values))
        self.substream_ids = np.asarray(self.substream_ids, dtype=np.int64)
        if len(self.substream_ids) != len(self.values):
            raise ValueError("one substream id per particle is required")
        if len(np.unique(self.substream_ids)) != len(self.substream_ids):
            raise ValueError("substream ids must be unique within a particle set")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return StateVector(self.values[i], self.t)


class GaussianMixturePrior:
    """Mixture of isotropic Gaussians ``sum_k w_k N(mu_k, s_k^2 I)``.

    Under the forward process the time-``t`` marginal stays a mixture with
    component means ``sqrt(abar_t) mu_k`` and variances
    ``abar_t s_k^2 + 1 - abar_t``, which gives exact scores and Tweedie maps.
    """

    def __init__(self, weights, means, variances):
        weights = np.atleast_1d(np.asarray(weights, dtype=float))
        means = np.asarray(means, dtype=float)
        if means.ndim == 1:
            means = means.reshape(len(weights), -1) if len(weights) > 1 else means.reshape(1, -1)
        variances = np.atleast_1d(np.asarray(variances, dtype=float))
        k = len(weights)
        if means.shape[0] != k or variances.shape != (k,):
            raise ValueError("weights, means and variances must describe the same number of components")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be non-negative and sum to 1")
        if np.any(variances <= 0):
            raise ValueError("component variances must be positive")
        if not np.all(np.isfinite(means)):
            raise ValueError("component means must be finite")
        self.weights = weights
        self.means = means
        self.variances = variances

    @classmethod
    def from_components(cls, components):
        """Build from ``[{"weight": w, "mean": [...], "variance": v}, ...]``."""
        if not components:
            raise ValueError("a prior needs at least one component")
        weights = [c["weight"] for c in components]
        means = [list(np.atleast_1d(c["mean"])) for c in components]
        if len({len(m) for m in means}) != 1:
            raise ValueError("all component means must have the same length")
        return cls(weights, means, [c["variance"] for c in components])

    @classmethod
    def gaussian(cls, mean, variance=1.0):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        return cls([1.0], mean[None, :], [variance])

    def __repr__(self):
        return f"GaussianMixturePrior(n_components={self.n_components}, dim={self.dim})"

    @property
    def dim(self):
        return self.means.shape[1]

    @property
    def n_components(self):
        return len(self.weights)

    @property
    def is_single(self):
        return self.n_components == 1

    @property
    def mean(self):
        return self.weights @ self.means

    @property
    def covariance(self):
        centered = self.means - self.mean
        between = np.einsum("k,ki,kj->ij", self.weights, centered, centered)
        return between + np.eye(self.dim) * (self.weights @ self.variances)

    def _marginal(self, alpha_bar):
        return np.sqrt(alpha_bar) * self.means, alpha_bar * self.variances + (1.0 - alpha_bar)

    def _component_terms(self, x, alpha_bar):
        """Per-component log weights+densities and scores at ``x``."""
        m, v = self._marginal(alpha_bar)
        diff = x[..., None, :] - m
        sq = np.einsum("...kd,...kd->...k", diff, diff)
        log_terms = np.log(self.weights) - 0.5 * sq / v - 0.5 * self.dim * np.log(2.0 * np.pi * v)
        scores = -diff / v[:, None]
        return log_terms, scores, v

    def log_density(self, x, alpha_bar=1.0):
        """Log density of the marginal with the given ``alpha_bar`` (1 = clean)."""
        x = check_points(x, "x", dim=self.dim)
        log_terms, _, _ = self._component_terms(x, alpha_bar)
        return logsumexp(log_terms, axis=-1)

    def score_at(self, x, alpha_bar):
        x = check_points(x, "x", dim=self.dim)
        log_terms, scores, _ = self._component_terms(x, alpha_bar)
        resp = softmax(log_terms, axis=-1)
        return np.einsum("...k,...kd->...d", resp, scores)

    def score(self, x, t, schedule):
        t = check_timestep(t, schedule.T)
        return self.score_at(x, schedule.alpha_bar(t))

    def score_hessian(self, x, t, schedule):
        """Hessian of the time-``t`` log marginal, shape ``(..., d, d)``."""
        t = check_timestep(t, schedule.T)
        x = check_points(x, "x", dim=self.dim)
        log_terms, scores, v = self._component_terms(x, schedule.alpha_bar(t))
        resp = softmax(log_terms, axis=-1)
        s = np.einsum("...k,...kd->...d", resp, scores)
        second = np.einsum("...k,...ki,...kj->...ij", resp, scores, scores)
        curvature = -np.einsum("...k,k->...", resp, 1.0 / v)
        eye = np.eye(self.dim)
        return curvature[..., None, None] * eye + second - s[..., :, None] * s[..., None, :]

    def tweedie_jacobian(self, x, t, schedule):
        """``d x0_hat / d x_t``; symmetric. Identity at ``t = 0``."""
        x = check_points(x, "x", dim=self.dim)
        if t == 0:
            return np.broadcast_to(np.eye(self.dim), x.shape + (self.dim,)).copy()
        abar = schedule.alpha_bar(t)
        hess = self.score_hessian(x, t, schedule)
        return (np.eye(self.dim) + (1.0 - abar) * hess) / np.sqrt(abar)

    def score_fn(self, schedule):
        """Closure ``(x, t) -> score`` for use with the reverse-process helpers."""
        return lambda x, t: self.score(x, t, schedule)

    def sample(self, n, rng):
        """Draw ``n`` clean samples using a numpy ``Generator``."""
        comp = rng.choice(self.n_components, size=n, p=self.weights)
        z = rng.standard_normal((n, self.dim))
        return self.means[comp] + np.sqrt(self.variances[comp])[:, None] * z


def forward_noise(x0, t, schedule, noise):
    """``sqrt(abar_t) x0 + sqrt(1 - abar_t) noise``."""
    t = check_timestep(t, schedule.T)
    x0 = check_points(x0, "x0")
    noise = check_points(noise, "noise", dim=x0.shape[-1])
    abar = schedule.alpha_bar(t)
    return np.sqrt(abar) * x0 + np.sqrt(1.0 - abar) * noise


def marginal_score(prior, x, t, schedule):
    """Exact score of the time-``t`` marginal of ``prior``."""
    if t == 0:
        raise ValueError("marginal_score is undefined at t=0")
    return prior.score(x, t, schedule)


def epsilon_from_score(score, schedule, t):
    t = check_timestep(t, schedule.T)
    return -np.sqrt(1.0 - schedule.alpha_bar(t)) * np.asarray(score, dtype=float)


def score_from_epsilon(eps, schedule, t):
    t = check_timestep(t, schedule.T)
    return -np.asarray(eps, dtype=float) / np.sqrt(1.0 - schedule.alpha_bar(t))


def reverse_step(x, t, schedule, score_fn, noise):
    """One ancestral step ``x_t -> x_{t-1}``.

    The posterior mean is formed from the epsilon prediction and the variance
    is ``beta_t``. At ``t = 1`` the supplied noise is ignored.
    """
    t = check_timestep(t, schedule.T)
    x = np.asarray(x, dtype=float)
    eps = epsilon_from_score(score_fn(x, t), schedule, t)
    alpha, abar = schedule.alpha(t), schedule.alpha_bar(t)
    mean = (x - ((1.0 - alpha) / np.sqrt(1.0 - abar)) * eps) / np.sqrt(alpha)
    if t == 1:
        return mean
    return mean + np.sqrt(schedule.beta(t)) * np.asarray(noise, dtype=float)


def tweedie_denoise(x, t, schedule, score_fn):
    """Posterior mean ``E[x0 | x_t]`` via Tweedie's formula; identity at ``t = 0``."""
    x = np.asarray(x, dtype=float)
    t = check_timestep(t, schedule.T, allow_zero=True)
    if t == 0:
        return x
    abar = schedule.alpha_bar(t)
    return (x + (1.0 - abar) * score_fn(x, t)) / np.sqrt(abar)


def sdedit_start(eta, T):
    """``round(eta * T)`` (half up), clamped to ``[1, T]``."""
    eta = check_open_unit(eta, "eta")
    return int(min(max(np.floor(eta * T + 0.5), 1), T))


def sdedit_init(reference, eta, schedule, count, random_state=None, *, noise=None):
    """Noise a clean reference to ``round(eta * T)`` for ``count`` particles.

    Each particle ``i`` takes its noise from row ``i`` of the ``"sdedit"``
    substream unless ``noise`` of shape ``(count, d)`` is injected.
    """
    reference = check_vector(reference, "reference")
    count = check_int(count, "count", min_val=1)
    start_t = sdedit_start(eta, schedule.T)
    if noise is None:
        noise = as_streams(random_state).normal("sdedit", start_t, size=(count, reference.size))
    values = forward_noise(np.broadcast_to(reference, (count, reference.size)), start_t, schedule, noise)
    return ParticleSet(values, start_t), start_t


def sample_unguided(prior, schedule, n, random_state=None, *, start=None):
    """Plain ancestral sampling of ``n`` independent trajectories.

    Noise is laid out as ``(n, 1, d)`` per step, the same layout a guided
    sampler with one particle per generation uses, so the two agree
    bit-for-bit under a shared seed. ``start`` is an optional
    ``(values, t)`` pair with values of shape ``(n, 1, d)``.
    """
    streams = as_streams(random_state)
    n = check_int(n, "n", min_val=1)
    score_fn = prior.score_fn(schedule)
    if start is None:
        x, t0 = streams.normal("init", size=(n, 1, prior.dim)), schedule.T
    else:
        x, t0 = np.array(start[0], dtype=float), int(start[1])
    for t in range(t0, 0, -1):
        x = reverse_step(x, t, schedule, score_fn, streams.normal("reverse", t, size=x.shape))
    return x[:, 0, :]


__all__ = [
    "GaussianMixturePrior",
    "NoiseSchedule",
    "ParticleSet",
    "StateVector",
    "default_schedule",
    "epsilon_from_score",
    "forward_noise",
    "make_linear_schedule",
    "marginal_score",
    "reverse_step",
    "sample_unguided",
    "score_from_epsilon",
    "sdedit_init",
    "sdedit_start",
    "tweedie_denoise",
]
