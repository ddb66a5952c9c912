from .config import GuidanceConfig
from .estimator import GuidedSampler
from .kmeans import kmeans_cluster
from .samplers import run_bon, run_code, run_gradient_only, run_sampler, run_unicode
from .selection import (
    argmax_probability,
    resample_multinomial,
    schedule_particles,
    select_greedy,
    softmax_weights,
)
from .steps import apply_gradient, clustered_gradients, grad_step, rescale_guidance

__all__ = [
    "GuidanceConfig",
    "GuidedSampler",
    "apply_gradient",
    "argmax_probability",
    "clustered_gradients",
    "grad_step",
    "kmeans_cluster",
    "rescale_guidance",
    "resample_multinomial",
    "run_bon",
    "run_code",
    "run_gradient_only",
    "run_sampler",
    "run_unicode",
    "schedule_particles",
    "select_greedy",
    "softmax_weights",
]
