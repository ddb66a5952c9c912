import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unicode_lab.diffusion import ParticleSet
from unicode_lab.guidance import (
    argmax_probability,
    resample_multinomial,
    schedule_particles,
    select_greedy,
    softmax_weights,
)


def particles(n, d=2):
    return ParticleSet(np.arange(n * d, dtype=float).reshape(n, d), 7, np.arange(100, 100 + n))


class TestSoftmax:
    def test_examples(self):
        np.testing.assert_allclose(softmax_weights([1.0, 1.0], 1.0), [0.5, 0.5], atol=1e-15)
        np.testing.assert_allclose(softmax_weights([0.0, np.log(3.0)], 1.0), [0.25, 0.75], atol=1e-15)
        e = np.e
        np.testing.assert_allclose(softmax_weights([2.0, 4.0], 2.0), [1 / (1 + e), e / (1 + e)], atol=1e-15)
        np.testing.assert_allclose(softmax_weights([2.0, 4.0], 2.0), [0.26894, 0.73106], atol=1e-5)

    def test_large_rewards_are_stable(self):
        w = softmax_weights([1e4, 1e4 + 1.0, -1e4], 1e-3)
        assert np.all(np.isfinite(w)) and w.sum() == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("tau", [0.0, -1.0])
    def test_invalid_temperature(self, tau):
        with pytest.raises(ValueError, match="temperature"):
            softmax_weights([0.0, 1.0], tau)

    @given(
        r=st.lists(st.floats(-50, 50), min_size=1, max_size=8),
        tau=st.floats(0.05, 10.0),
        c=st.floats(0.1, 10.0),
    )
    def test_scale_invariance_and_normalisation(self, r, tau, c):
        r = np.array(r)
        w = softmax_weights(r, tau)
        assert abs(w.sum() - 1.0) < 1e-12
        np.testing.assert_allclose(softmax_weights(c * r, c * tau), w, atol=1e-12)

    def test_greedy_limit(self):
        # gaps of at least 0.1 at tau=1e-9 put all but a vanishing mass on the argmax
        assert argmax_probability([0.0, 0.1, 0.05], 1e-9) >= 1 - 1e-6
        assert argmax_probability([3.0, 2.9, -1.0, 2.0], 1e-9) >= 1 - 1e-6


class TestResample:
    def test_one_hot(self):
        out = resample_multinomial(particles(4), [0.0, 0.0, 1.0, 0.0], 6, np.random.default_rng(0))
        np.testing.assert_array_equal(out.values, np.repeat(particles(4).values[[2]], 6, axis=0))
        assert out.t == 7

    def test_frequency(self):
        ps = ParticleSet(np.array([[0.0], [1.0]]), 0)
        out = resample_multinomial(ps, [0.25, 0.75], 100_000, np.random.default_rng(2024))
        assert abs(out.values.mean() - 0.75) < 0.01

    def test_empty_and_fresh_ids(self):
        out = resample_multinomial(particles(3), [0.2, 0.3, 0.5], 0, np.random.default_rng(0))
        assert len(out) == 0
        out = resample_multinomial(particles(3), [0.2, 0.3, 0.5], 5, np.random.default_rng(0))
        assert len(np.unique(out.substream_ids)) == 5

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            resample_multinomial(particles(3), [0.5, 0.5], 2, np.random.default_rng(0))


class TestGreedy:
    def test_argmax_copies(self):
        out = select_greedy(particles(3), [0.2, 0.9, 0.5], 3)
        np.testing.assert_array_equal(out.values, np.repeat(particles(3).values[[1]], 3, axis=0))

    def test_ties_go_to_lowest_index(self):
        out = select_greedy(particles(3), [1.0, 1.0, 1.0], 2)
        np.testing.assert_array_equal(out.values, np.repeat(particles(3).values[[0]], 2, axis=0))

    def test_errors(self):
        with pytest.raises(ValueError):
            select_greedy(ParticleSet(np.empty((0, 2)), 0), [], 1)
        with pytest.raises(ValueError):
            select_greedy(particles(3), [1.0, 2.0], 1)


class TestSchedule:
    def test_examples(self):
        paper = [2, 2, 2, 4, 4, 4, 4, 6, 6, 6]
        assert schedule_particles(paper, 10) == paper
        assert schedule_particles([4], 7) == [4] * 7
        assert schedule_particles([2, 6], 4) == [2, 2, 6, 6]

    def test_errors(self):
        with pytest.raises(ValueError):
            schedule_particles([], 3)
        with pytest.raises(ValueError):
            schedule_particles([2], 0)
