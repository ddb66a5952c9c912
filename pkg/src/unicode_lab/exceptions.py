class GradientUnavailableError(RuntimeError):
    """Raised when an analytic gradient is requested from a reward that has none."""


class UnsupportedPriorError(ValueError):
    """Raised when an oracle is only defined for single-Gaussian priors."""
