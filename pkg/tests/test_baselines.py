import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l2p.baselines import KnnConfig, knn_predict, knn_predict_many, random_baseline
from l2p.data import Dataset, generate_synthetic
from l2p.errors import DimensionMismatchError, L2PError
from l2p.metrics import emd, ks_statistic, roc_auc


def _ds(X, y, ids=None):
    X = np.asarray(X, float)
    ids = np.arange(len(y)) if ids is None else ids
    return Dataset(ids, X, y, [f"f{j}" for j in range(X.shape[1])])


class TestKnn:
    def test_exact_match_k1(self):
        ds = generate_synthetic(30, 3, 1.5, seed=0)
        assert knn_predict(ds, ds.X[7], KnnConfig(k=1)) == ds.y[7]

    def test_equidistant_mean(self):
        ds = _ds([[0.0], [2.0]], [0.0, 10.0])
        assert knn_predict(ds, [1.0], KnnConfig(k=2)) == 5.0

    def test_grid_hand_computed(self):
        x = np.arange(10) / 10
        ds = _ds(x[:, None], x)
        # 0.3 and 0.4 are nearest; 0.2 and 0.5 follow; 0.1 and 0.6 tie at 0.25, id 1 wins
        expect = (0.3 + 0.4 + 0.2 + 0.5 + 0.1) / 5
        assert knn_predict(ds, [0.35]) == pytest.approx(expect, abs=1e-12)

    def test_grid_brute_force(self):
        x = np.arange(10) / 10
        ds = _ds(x[:, None], x)
        dist = [abs(v - 0.35) for v in x]
        nearest = sorted(range(10), key=lambda i: (dist[i], i))[:5]
        assert knn_predict(ds, [0.35]) == pytest.approx(np.mean(x[nearest]), abs=1e-12)

    def test_tie_breaks_by_id(self):
        # both neighbours at distance 1; the smaller id wins regardless of row order
        ds = _ds([[1.0], [-1.0]], [100.0, 7.0], ids=np.array([9, 3]))
        assert knn_predict(ds, [0.0], KnnConfig(k=1)) == 7.0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 8))
    def test_within_neighbour_range(self, seed, k):
        ds = generate_synthetic(40, 2, 1.5, seed=seed % 1000)
        q = np.random.default_rng(seed).uniform(size=2)
        d = np.linalg.norm(ds.X - q, axis=1)
        nearest = np.lexsort((ds.ids, d))[:k]
        pred = knn_predict(ds, q, KnnConfig(k=k))
        assert ds.y[nearest].min() - 1e-12 <= pred <= ds.y[nearest].max() + 1e-12

    def test_errors(self):
        ds = _ds([[0.0], [1.0]], [0.0, 1.0])
        with pytest.raises(L2PError):
            knn_predict(ds, [0.0], KnnConfig(k=3))
        with pytest.raises(DimensionMismatchError):
            knn_predict_many(ds, [[0.0, 1.0]], KnnConfig(k=1))
        with pytest.raises(L2PError):
            KnnConfig(k=0)
        with pytest.raises(L2PError):
            KnnConfig(metric="manhattan")


class TestRandomBaseline:
    def test_preserves_distribution(self):
        y = generate_synthetic(500, 2, 1.5, seed=0).y
        r = random_baseline(y, seed=1)
        assert ks_statistic(y, r) == 0.0 and emd(y, r) == 0.0
        assert not np.array_equal(r, y)

    def test_auc_half(self):
        y = generate_synthetic(10**4, 2, 1.5, seed=0).y
        assert roc_auc(y, random_baseline(y, seed=0)).auc == pytest.approx(0.5, abs=0.05)

    def test_deterministic(self):
        y = np.arange(50.0)
        np.testing.assert_array_equal(random_baseline(y, 3), random_baseline(y, 3))
        assert not np.array_equal(random_baseline(y, 3), random_baseline(y, 4))

    def test_empty(self):
        with pytest.raises(L2PError):
            random_baseline([])
