"""Inference-time reward alignment of diffusion samplers on analytic priors."""

from .diffusion import (
    GaussianMixturePrior,
    NoiseSchedule,
    ParticleSet,
    StateVector,
    default_schedule,
    epsilon_from_score,
    forward_noise,
    make_linear_schedule,
    marginal_score,
    reverse_step,
    sample_unguided,
    sdedit_init,
    tweedie_denoise,
)
from .exceptions import GradientUnavailableError, UnsupportedPriorError
from .guidance import GuidanceConfig, GuidedSampler
from .metrics import RunMetrics, TiltedGaussian, expected_reward, mmd2_rbf, tilted_oracle
from .nfe import NfeCounters
from .rewards import (
    RewardModel,
    ZooConfig,
    linear_reward,
    quantized_reward,
    target_reward,
    weighted_sum_reward,
)
from .rng import SeedStreams

__version__ = "0.1.0"

__all__ = [
    "GaussianMixturePrior",
    "GradientUnavailableError",
    "GuidanceConfig",
    "GuidedSampler",
    "NfeCounters",
    "NoiseSchedule",
    "ParticleSet",
    "RewardModel",
    "RunMetrics",
    "SeedStreams",
    "StateVector",
    "TiltedGaussian",
    "UnsupportedPriorError",
    "ZooConfig",
    "default_schedule",
    "epsilon_from_score",
    "expected_reward",
    "forward_noise",
    "linear_reward",
    "make_linear_schedule",
    "marginal_score",
    "mmd2_rbf",
    "quantized_reward",
    "reverse_step",
    "sample_unguided",
    "sdedit_init",
    "target_reward",
    "tilted_oracle",
    "tweedie_denoise",
    "weighted_sum_reward",
]
