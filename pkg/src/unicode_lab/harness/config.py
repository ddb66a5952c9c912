"""Experiment configuration files.

Configs are TOML. Top-level keys: ``name``, ``seeds``, ``replicates``,
``n_samples``, ``reference_samples``, ``mmd_bandwidth``, ``timing``,
``output``. Sections: ``[prior]``, optional ``[conditional_prior]``,
``[reward]``, ``[schedule]``, ``[guidance]``, optional ``[sdedit]``,
``[sweep]``, plus arrays of tables ``[[variant]]`` and ``[[tradeoff]]``.
See ``scenarios/*.toml`` for complete examples.
"""

import copy
import itertools
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..diffusion import GaussianMixturePrior, default_schedule, make_linear_schedule
from ..guidance import GuidedSampler
from ..rewards import linear_reward, quantized_reward, target_reward, weighted_sum_reward

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_SEED = 2024
DEFAULT_T = 500

# CSV column names accepted as shorthands for guidance parameters
ALIASES = {
    "N": "n_particles",
    "B_s": "block_sample",
    "B_g": "block_grad",
    "tau": "temperature",
    "gamma": "guidance_scale",
    "schedule": "particle_schedule",
    "method": "sampler",
}

GUIDANCE_PARAMS = frozenset(GuidedSampler().get_params())
TOP_LEVEL = frozenset(
    {
        "name", "seeds", "replicates", "n_samples", "reference_samples", "mmd_bandwidth",
        "timing", "output", "prior", "conditional_prior", "reward", "schedule", "guidance",
        "sdedit", "sweep", "variant", "tradeoff",
    }
)


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


@dataclass
class ExperimentConfig:
    prior: list
    reward: dict
    schedule: dict = field(default_factory=lambda: {"T": DEFAULT_T})
    guidance: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    variants: list = field(default_factory=lambda: [{}])
    seeds: list = field(default_factory=lambda: [DEFAULT_SEED])
    replicates: int = 1
    n_samples: int = 32
    reference_samples: int = 256
    mmd_bandwidth: Optional[float] = None
    timing: bool = False
    conditional_prior: Optional[list] = None
    sdedit: Optional[dict] = None
    tradeoff: list = field(default_factory=list)
    output: str = "results"
    name: str = "experiment"

    def cells(self):
        """Every parameter combination: variants x product of sweep axes.

        Yields ``(overrides, key)`` where ``overrides`` maps canonical field
        names to values and ``key`` is the tuple of swept values in axis order.
        """
        axes = list(self.sweep.items())
        for variant in self.variants:
            for combo in itertools.product(*(values for _, values in axes)):
                overrides = dict(variant)
                overrides.update({name: value for (name, _), value in zip(axes, combo)})
                key = tuple(_sort_token(v) for v in variant.values()) + tuple(_sort_token(v) for v in combo)
                yield overrides, key

    @property
    def n_cells(self):
        return len(self.variants) * int(np.prod([len(v) for v in self.sweep.values()], dtype=int))

    def build_prior(self):
        return GaussianMixturePrior.from_components(self.prior)

    def build_conditional_prior(self):
        if self.conditional_prior is None:
            return None
        return GaussianMixturePrior.from_components(self.conditional_prior)

    def resolve(self, overrides):
        """Apply a cell's overrides; returns ``(guidance params, reward spec, schedule spec)``."""
        guidance, reward, schedule = dict(self.guidance), copy.deepcopy(self.reward), dict(self.schedule)
        for name, value in overrides.items():
            if name.startswith("reward."):
                _set_path(reward, name.split(".")[1:], value)
            elif name.startswith("schedule."):
                schedule[name.split(".", 1)[1]] = value
            else:
                guidance[name] = value
        return guidance, reward, schedule


def _sort_token(value):
    if value is None:
        return (0, 0.0, "")
    if isinstance(value, bool):
        return (1, float(value), "")
    if isinstance(value, (int, float)):
        return (1, float(value), "")
    if isinstance(value, str):
        return (2, 0.0, value)
    return (3, 0.0, json.dumps(value, sort_keys=True))


def _set_path(spec, path, value):
    node = spec
    for part in path[:-1]:
        if not isinstance(node.get(part), dict):
            raise KeyError(".".join(path))
        node = node[part]
    if path[-1] not in node:
        raise KeyError(".".join(path))
    node[path[-1]] = value


def build_reward(spec):
    """Instantiate a reward from its spec dict (``kind`` plus parameters)."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "linear":
        return linear_reward(spec["a"])
    if kind == "target":
        return target_reward(spec["target"], spec.get("scale", 1.0))
    if kind == "quantized":
        return quantized_reward(build_reward(spec["base"]), spec["step"])
    if kind == "weighted_sum":
        return weighted_sum_reward(spec["gamma1"], build_reward(spec["r1"]), spec["gamma2"], build_reward(spec["r2"]))
    raise ConfigError(f"reward.kind: unknown reward kind {kind!r}")


def build_schedule(spec):
    T = spec.get("T", DEFAULT_T)
    if "beta_start" in spec or "beta_end" in spec:
        return make_linear_schedule(T, spec.get("beta_start", 1e-4), spec.get("beta_end", 0.02))
    return default_schedule(T)


def build_estimator(params, n_samples):
    est = GuidedSampler(n_samples=n_samples)
    est.set_params(**params)
    return est


def _canonical(name):
    return ALIASES.get(name, name)


def _validate(cfg):
    """Build every object once per cell so errors surface before any run."""
    try:
        prior = cfg.build_prior()
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"prior: {exc}") from exc
    if cfg.conditional_prior is not None:
        try:
            cond = cfg.build_conditional_prior()
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"conditional_prior: {exc}") from exc
        if cond.dim != prior.dim:
            raise ConfigError("conditional_prior: dimension differs from prior")
    if not cfg.seeds:
        raise ConfigError("seeds: at least one seed is required")
    if any(int(s) < 0 for s in cfg.seeds):
        raise ConfigError("seeds: seeds must be non-negative")
    for name, value, low in (("replicates", cfg.replicates, 1), ("n_samples", cfg.n_samples, 1),
                             ("reference_samples", cfg.reference_samples, 2)):
        if not isinstance(value, int) or value < low:
            raise ConfigError(f"{name}: must be an integer >= {low}, got {value!r}")
    if cfg.mmd_bandwidth is not None and not cfg.mmd_bandwidth > 0:
        raise ConfigError("mmd_bandwidth: must be positive")
    if cfg.sdedit is not None:
        if "reference" not in cfg.sdedit or "eta" not in cfg.sdedit:
            raise ConfigError("sdedit: needs 'reference' and 'eta'")
        if len(cfg.sdedit["reference"]) != prior.dim:
            raise ConfigError("sdedit.reference: length differs from prior dimension")
        if not 0 < cfg.sdedit["eta"] < 1:
            raise ConfigError("sdedit.eta: must lie in (0, 1)")

    for name, values in cfg.sweep.items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep.{name}: must be a non-empty list")
        if name in GUIDANCE_PARAMS or name == "schedule.T":
            continue
        if name.startswith("reward."):
            try:
                _set_path(copy.deepcopy(cfg.reward), name.split(".")[1:], values[0])
            except KeyError:
                raise ConfigError(f"sweep.{name}: no such reward parameter") from None
            continue
        raise ConfigError(f"sweep.{name}: not a configurable field")

    for overrides, _ in cfg.cells():
        guidance, reward_spec, schedule_spec = cfg.resolve(overrides)
        field_name = "guidance"
        try:
            field_name = "reward"
            reward = build_reward(reward_spec)
            field_name = "schedule"
            schedule = build_schedule(schedule_spec)
            field_name = "guidance"
            build_estimator(guidance, cfg.n_samples).fit(prior, reward, schedule, cfg.build_conditional_prior())
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{field_name}: {exc}") from exc

    for i, spec in enumerate(cfg.tradeoff):
        if "x" not in spec or "y" not in spec:
            raise ConfigError(f"tradeoff[{i}]: needs 'x' and 'y'")


def parse_config(data):
    """Validate a parsed config mapping and fill defaults."""
    unknown = set(data) - TOP_LEVEL
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown top-level field")
    if "prior" not in data or "components" not in data.get("prior", {}):
        raise ConfigError("prior: a [prior] section with 'components' is required")
    if "reward" not in data:
        raise ConfigError("reward: a [reward] section is required")

    guidance = {}
    for name, value in data.get("guidance", {}).items():
        if name == "zoo" and isinstance(value, dict):
            for sub, subvalue in value.items():
                key = {"sigma": "zoo_sigma", "n_probes": "zoo_probes"}.get(sub)
                if key is None:
                    raise ConfigError(f"guidance.zoo.{sub}: unknown field")
                guidance[key] = subvalue
            continue
        canon = _canonical(name)
        if canon not in GUIDANCE_PARAMS or canon == "n_samples":
            raise ConfigError(f"guidance.{name}: unknown field")
        guidance[canon] = value

    sweep = {}
    for name, values in data.get("sweep", {}).items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep.{name}: must be a non-empty list")
        sweep[_canonical(name)] = values

    variants = []
    for i, variant in enumerate(data.get("variant", [{}])):
        resolved = {}
        for name, value in variant.items():
            canon = _canonical(name)
            if canon not in GUIDANCE_PARAMS:
                raise ConfigError(f"variant[{i}].{name}: unknown field")
            resolved[canon] = value
        variants.append(resolved)

    seeds = data.get("seeds", [DEFAULT_SEED])
    if isinstance(seeds, int):
        seeds = [seeds]
    cfg = ExperimentConfig(
        prior=data["prior"]["components"],
        reward=data["reward"],
        schedule=data.get("schedule", {"T": DEFAULT_T}),
        guidance=guidance,
        sweep=sweep,
        variants=variants or [{}],
        seeds=[int(s) for s in seeds],
        replicates=data.get("replicates", 1),
        n_samples=data.get("n_samples", 32),
        reference_samples=data.get("reference_samples", 256),
        mmd_bandwidth=data.get("mmd_bandwidth"),
        timing=bool(data.get("timing", False)),
        conditional_prior=data.get("conditional_prior", {}).get("components"),
        sdedit=data.get("sdedit"),
        tradeoff=list(data.get("tradeoff", [])),
        output=data.get("output", "results"),
        name=data.get("name", "experiment"),
    )
    _validate(cfg)
    return cfg


def load_config(path):
    """Read and validate a TOML experiment config."""
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from exc
    return parse_config(data)
