from dataclasses import dataclass, field, fields
from typing import Optional, Tuple

from .._validation import check_int, check_positive
from ..rewards import ZooConfig

SAMPLERS = ("bon", "code", "grad_only", "unicode")
SELECTIONS = ("greedy", "multinomial")
GRAD_MODES = ("analytic", "zero_order")
RESCALE_MODES = ("fixed", "cfg_rescaled")


def _check_choice(value, name, choices):
    if value not in choices:
        raise ValueError(f"{name} must be one of {choices}, got {value!r}")
    return value


@dataclass(frozen=True)
class GuidanceConfig:
    """Hyperparameters shared by all sampler variants.

    ``grad_window`` is ``(start_ratio, end_ratio)``: gradients are applied
    while the noise ratio ``t / T`` lies in ``[end_ratio, start_ratio]``.
    ``rescale_clamp`` bounds the rescaled guidance scale; ``None`` means
    ``10 * guidance_scale``.
    """

    n_particles: int = 4
    block_sample: int = 5
    block_grad: int = 5
    temperature: float = 0.1
    guidance_scale: float = 0.2
    sampler: str = "unicode"
    selection: str = "greedy"
    particle_schedule: Optional[Tuple[int, ...]] = None
    grad_window: Tuple[float, float] = (0.6, 0.0)
    cluster_k: Optional[int] = None
    grad_repeats: int = 1
    grad_mode: str = "analytic"
    rescale_mode: str = "fixed"
    zoo: ZooConfig = field(default_factory=ZooConfig)
    scale_cfg: float = 5.0
    rescale_clamp: Optional[float] = None
    kmeans_iters: int = 20

    def __post_init__(self):
        set_ = lambda name, value: object.__setattr__(self, name, value)  # noqa: E731
        set_("n_particles", check_int(self.n_particles, "n_particles", min_val=1))
        set_("block_sample", check_int(self.block_sample, "block_sample", min_val=1))
        set_("block_grad", check_int(self.block_grad, "block_grad", min_val=1))
        set_("temperature", check_positive(self.temperature, "temperature"))
        set_("guidance_scale", check_positive(self.guidance_scale, "guidance_scale", allow_zero=True))
        _check_choice(self.sampler, "sampler", SAMPLERS)
        _check_choice(self.selection, "selection", SELECTIONS)
        _check_choice(self.grad_mode, "grad_mode", GRAD_MODES)
        _check_choice(self.rescale_mode, "rescale_mode", RESCALE_MODES)
        if self.particle_schedule is not None:
            sched = tuple(check_int(n, "particle_schedule", min_val=1) for n in self.particle_schedule)
            if not sched:
                raise ValueError("particle_schedule must be non-empty when given")
            set_("particle_schedule", sched)
        start, end = (float(v) for v in self.grad_window)
        if not (0.0 <= end <= start <= 1.0):
            raise ValueError(f"grad_window must satisfy 0 <= end_ratio <= start_ratio <= 1, got {(start, end)}")
        set_("grad_window", (start, end))
        if self.cluster_k is not None:
            set_("cluster_k", check_int(self.cluster_k, "cluster_k", min_val=1))
        set_("grad_repeats", check_int(self.grad_repeats, "grad_repeats", min_val=1))
        if isinstance(self.zoo, dict):
            set_("zoo", ZooConfig(**self.zoo))
        set_("scale_cfg", check_positive(self.scale_cfg, "scale_cfg", allow_zero=True))
        if self.rescale_clamp is not None:
            set_("rescale_clamp", check_positive(self.rescale_clamp, "rescale_clamp"))
        set_("kmeans_iters", check_int(self.kmeans_iters, "kmeans_iters", min_val=1))

    @property
    def clamp(self):
        return 10.0 * self.guidance_scale if self.rescale_clamp is None else self.rescale_clamp

    def in_window(self, t, T):
        start, end = self.grad_window
        return end <= t / T <= start


FIELD_NAMES = tuple(f.name for f in fields(GuidanceConfig))
