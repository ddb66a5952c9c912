from dataclasses import dataclass


@dataclass
class NfeCounters:
    """Running totals of function evaluations.

    ``denoiser_calls`` counts reverse-step score evaluations, ``reward_evals``
    every reward evaluation (including zero-order probes) and
    ``gradient_evals`` every gradient computation (one per analytic gradient,
    ``2 * n_probes`` per zero-order estimate).
    """

    denoiser_calls: int = 0
    reward_evals: int = 0
    gradient_evals: int = 0

    def add(self, *, denoiser_calls=0, reward_evals=0, gradient_evals=0):
        if min(denoiser_calls, reward_evals, gradient_evals) < 0:
            raise ValueError("NFE increments must be non-negative")
        self.denoiser_calls += int(denoiser_calls)
        self.reward_evals += int(reward_evals)
        self.gradient_evals += int(gradient_evals)

    def per_sample(self, n_samples):
        """Counters divided by the number of independent generations in a batch."""
        return NfeCounters(
            self.denoiser_calls // n_samples,
            self.reward_evals // n_samples,
            self.gradient_evals // n_samples,
        )

    def as_dict(self):
        return {
            "denoiser_calls": self.denoiser_calls,
            "reward_evals": self.reward_evals,
            "gradient_evals": self.gradient_evals,
        }
