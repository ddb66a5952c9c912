"""Named, counter-keyed random substreams.

Every draw in a run is taken from a generator keyed by ``(seed, *extra,
phase, *indices)``, for example ``("reverse", t)`` for the noise injected at
reverse step ``t``. A draw therefore depends only on where it happens in the
algorithm, never on how many draws happened before it, which keeps results
independent of evaluation order and lets two samplers that share a phase
share its noise exactly.
"""

import numpy as np

PHASES = {
    "init": 0,
    "reverse": 1,
    "select": 2,
    "zoo": 3,
    "kmeans": 4,
    "sdedit": 5,
    "reference": 6,
    "forward": 7,
}


class SeedStreams:
    """Factory of deterministic generators derived from one seed.

    Parameters
    ----------
    seed : int
        Non-negative base seed.
    *extra : int
        Additional key components, e.g. a replicate index.
    """

    def __init__(self, seed, *extra):
        key = (int(seed), *(int(e) for e in extra))
        if any(k < 0 for k in key):
            raise ValueError(f"seed components must be non-negative, got {key}")
        self.key = key

    def __repr__(self):
        return f"SeedStreams{self.key}"

    def child(self, *extra):
        return SeedStreams(*self.key, *extra)

    def fork(self, phase):
        """Independent stream family for a named purpose, e.g. reference samples."""
        if phase not in PHASES:
            raise KeyError(f"unknown RNG phase {phase!r}")
        return SeedStreams(*self.key, 1000 + PHASES[phase])

    def generator(self, phase, *indices):
        if phase not in PHASES:
            raise KeyError(f"unknown RNG phase {phase!r}")
        entropy = [*self.key, PHASES[phase], *(int(i) for i in indices)]
        return np.random.default_rng(np.random.SeedSequence(entropy))

    def normal(self, phase, *indices, size):
        return self.generator(phase, *indices).standard_normal(size)


def as_streams(random_state):
    """Accept an int seed or an existing :class:`SeedStreams`."""
    if isinstance(random_state, SeedStreams):
        return random_state
    if random_state is None:
        return SeedStreams(2024)
    return SeedStreams(int(random_state))
