import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l2p.data import generate_synthetic
from l2p.errors import L2PError
from l2p.robustness import (
    DistanceError,
    RandomError,
    inject_errors,
    oracle_labels,
    query_percentile,
    rank_percentiles,
    robustness_sweep,
)


class TestOracleLabels:
    def test_basic(self):
        assert oracle_labels([1, 5, 10], 3).tolist() == [-1, 1, 1]

    def test_above_all(self):
        assert oracle_labels([1, 5, 10], 11).tolist() == [-1, -1, -1]

    def test_tie_abstains(self):
        assert oracle_labels([1, 5, 10], 5).tolist() == [-1, 0, 1]


class TestPercentiles:
    def test_scale(self):
        np.testing.assert_allclose(rank_percentiles([10, 30, 20]), [0, 1, 0.5])
        np.testing.assert_allclose(rank_percentiles([1, 1, 2]), [0.25, 0.25, 1.0])

    def test_query_matches_rank_of_equal_target(self):
        t = np.array([1.0, 4.0, 9.0, 16.0])
        assert query_percentile(t, 9.0) == pytest.approx(rank_percentiles(t)[2])
        assert query_percentile(t, 0.0) == 0.0 and query_percentile(t, 100.0) == 1.0
        assert query_percentile(t, 5.0) == pytest.approx(1.5 / 3)


class TestInject:
    labels = np.array([1, -1, 1, 0, -1, 1], dtype=np.int8)
    ranks = np.linspace(0, 1, 6)

    def test_no_error(self):
        out, frac = inject_errors(self.labels, self.ranks, 0.3, RandomError(0.0), seed=1)
        np.testing.assert_array_equal(out, self.labels)
        assert frac == 0.0

    def test_full_flip(self):
        out, frac = inject_errors(self.labels, self.ranks, 0.3, RandomError(1.0), seed=1)
        np.testing.assert_array_equal(out, -self.labels)
        assert frac == 1.0

    def test_alpha_zero_flips_all(self):
        out, frac = inject_errors(self.labels, self.ranks, 0.3, DistanceError(0.0), seed=1)
        np.testing.assert_array_equal(out, -self.labels)
        assert frac == 1.0

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0, 1), st.integers(0, 10**6))
    def test_idempotent(self, p, seed):
        rng = np.random.default_rng(seed)
        labels = rng.choice(np.array([-1, 0, 1], dtype=np.int8), 50)
        ranks = rng.uniform(size=50)
        once, _ = inject_errors(labels, ranks, 0.5, RandomError(p), seed)
        twice, _ = inject_errors(once, ranks, 0.5, RandomError(p), seed)
        np.testing.assert_array_equal(twice, labels)

    @pytest.mark.parametrize("p_c", [0.1, 0.3, 0.5])
    def test_fraction_converges(self, p_c):
        n = 20000
        labels = np.ones(n, dtype=np.int8)
        _, frac = inject_errors(labels, np.zeros(n), 0.0, RandomError(p_c), seed=3)
        assert abs(frac - p_c) <= 3 * np.sqrt(p_c * (1 - p_c) / n)

    def test_distance_concentrated(self):
        n = 5000
        rng = np.random.default_rng(0)
        ranks = rng.uniform(size=n)
        labels = np.ones(n, dtype=np.int8)
        out, _ = inject_errors(labels, ranks, 0.5, DistanceError(5.0), seed=2)
        gap = np.abs(ranks - 0.5)
        flipped = out != labels
        assert gap[flipped].mean() < gap[~flipped].mean()

    def test_invalid(self):
        with pytest.raises(L2PError):
            RandomError(1.5)
        with pytest.raises(L2PError):
            DistanceError(-1.0)
        with pytest.raises(L2PError):
            inject_errors([1, 1], [0.1], 0.0, RandomError(0.1))


@pytest.fixture(scope="module")
def synth():
    return generate_synthetic(300, 4, 1.5, seed=0)


class TestSweep:
    def test_random_grid(self, synth, tmp_path):
        curve = robustness_sweep(synth, "random", [0.0, 0.25, 0.5], seed=0)
        acc = [p.realized_accuracy for p in curve.points]
        assert acc[0] == 1.0
        np.testing.assert_allclose(acc, [1.0, 0.75, 0.5], atol=0.03)
        aucs = [p.auc for p in curve.points]
        assert aucs[0] == max(aucs)
        path = tmp_path / "r.csv"
        curve.write_csv(path)
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["parameter", "realized_accuracy", "auc"] and len(rows) == 4

    def test_distance_monotone(self, synth):
        curve = robustness_sweep(synth, "distance", [1.0, 5.0, 20.0], seed=0)
        acc = [p.realized_accuracy for p in curve.points]
        assert acc[0] < acc[1] < acc[2]

    def test_deterministic(self, synth):
        a = robustness_sweep(synth, "random", [0.2], seed=4)
        b = robustness_sweep(synth, "random", [0.2], seed=4)
        assert a == b

    def test_errors(self, synth):
        with pytest.raises(L2PError):
            robustness_sweep(synth, "gaussian", [0.1])
        with pytest.raises(L2PError):
            robustness_sweep(synth, "random", [])
