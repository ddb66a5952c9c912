"""Fast oracle checks runnable from an installed package (``unicode-lab selftest``)."""

import numpy as np

from ..diffusion import GaussianMixturePrior, default_schedule, sample_unguided, tweedie_denoise
from ..guidance import GuidanceConfig, argmax_probability, run_bon, run_code, run_unicode, softmax_weights
from ..metrics import tilted_oracle
from ..rewards import ZooConfig, linear_reward, target_reward, zero_order_gradient


def _tweedie():
    sched = default_schedule(50)
    mu, var = np.array([0.5, -1.0]), 0.7
    prior = GaussianMixturePrior.gaussian(mu, var)
    x = np.random.default_rng(0).normal(size=(20, 2)) * 2
    worst = 0.0
    for t in (1, 10, 25, 50):
        ab = sched.alpha_bar(t)
        oracle = mu + np.sqrt(ab) * var / (ab * var + 1 - ab) * (x - np.sqrt(ab) * mu)
        worst = max(worst, np.abs(tweedie_denoise(x, t, sched, prior.score_fn(sched)) - oracle).max())
    return worst < 1e-9, f"max error {worst:.2e}"


def _score():
    sched = default_schedule(50)
    prior = GaussianMixturePrior([0.3, 0.7], [[-2.0, 0.0], [1.5, 1.0]], [0.5, 1.2])
    x = np.random.default_rng(1).normal(size=(10, 2)) * 2
    worst = 0.0
    for t in (1, 20, 50):
        ab = sched.alpha_bar(t)
        fd = np.empty_like(x)
        for i in range(2):
            e = np.zeros(2)
            e[i] = 1e-5
            fd[:, i] = (prior.log_density(x + e, ab) - prior.log_density(x - e, ab)) / 2e-5
        s = prior.score(x, t, sched)
        worst = max(worst, (np.linalg.norm(s - fd, axis=1) / np.maximum(np.linalg.norm(fd, axis=1), 1e-8)).max())
    return worst < 1e-4, f"max relative error {worst:.2e}"


def _softmax():
    w = softmax_weights([0.0, np.log(3.0)], 1.0)
    p = argmax_probability([0.0, 0.1, 0.05], 1e-9)
    return bool(np.allclose(w, [0.25, 0.75], atol=1e-12) and p >= 1 - 1e-6), f"weights {w}, argmax mass {p}"


def _zero_order():
    reward = target_reward([0.3, -0.2], 1.0)
    x = np.array([1.0, 0.5])
    g = zero_order_gradient(reward, x, ZooConfig(1e-2, 2000), np.random.default_rng(7))
    true = reward.gradient(x)
    cos = float(g @ true / np.linalg.norm(g) / np.linalg.norm(true))
    return cos >= 0.99, f"cosine {cos:.4f}"


def _tilt():
    prior = GaussianMixturePrior.gaussian([0.0], 1.0)
    x = np.random.default_rng(3).standard_normal((200_000, 1))
    w = np.exp(x[:, 0])
    is_mean = float((w @ x[:, 0]) / w.sum())
    err = abs(is_mean - tilted_oracle(prior, [1.0], 1.0).mean[0])
    return err < 0.02, f"importance-sampling mean error {err:.4f}"


def _degeneracy():
    prior = GaussianMixturePrior.gaussian([1.0, 1.0])
    reward, sched = linear_reward([1.0, 0.0]), default_schedule(30)
    base = sample_unguided(prior, sched, 8, 11)
    ok = np.array_equal(run_bon(GuidanceConfig(sampler="bon", n_particles=1), prior, reward, sched, 11, n_samples=8)[0], base)
    ok &= np.array_equal(run_code(GuidanceConfig(sampler="code", n_particles=1), prior, reward, sched, 11, n_samples=8)[0], base)
    code = run_code(GuidanceConfig(sampler="code"), prior, reward, sched, 11, n_samples=8)[0]
    uni = run_unicode(GuidanceConfig(guidance_scale=0.0), prior, reward, sched, 11, n_samples=8)[0]
    ok &= np.array_equal(code, uni)
    return bool(ok), "bit-exact reductions"


def _fidelity():
    prior = GaussianMixturePrior.gaussian([0.5], 0.8)
    x = sample_unguided(prior, default_schedule(100), 4000, 5)
    m, v = float(x.mean()), float(x.var())
    return abs(m - 0.5) < 0.05 and abs(v - 0.8) < 0.1, f"mean {m:.3f}, variance {v:.3f}"


CHECKS = {
    "tweedie_exactness": _tweedie,
    "score_finite_differences": _score,
    "softmax_selection": _softmax,
    "zero_order_cosine": _zero_order,
    "tilted_oracle": _tilt,
    "degeneracy_reductions": _degeneracy,
    "unguided_fidelity": _fidelity,
}


def run_selftest(verbose=True):
    all_ok = True
    for name, check in CHECKS.items():
        ok, detail = check()
        all_ok &= ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name:28s} {detail}")
    return all_ok
