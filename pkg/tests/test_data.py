import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from l2p.data import (
    Dataset,
    ccdf_points,
    generate_synthetic,
    kurtosis,
    load_csv,
    stratified_kfold,
    synthetic_weights,
    write_csv,
)
from l2p.errors import DataError, L2PError, UndefinedKurtosisError


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_basic(self, tmp_path):
        p = _write(tmp_path, "a,b,t\n1,2,3\n4,5,6\n7,8,9.5\n")
        ds = load_csv(p, "t")
        assert ds.d == 2 and ds.n == 3
        assert ds.feature_names == ("a", "b")
        assert ds.target_name == "t"
        np.testing.assert_array_equal(ds.X, [[1, 2], [4, 5], [7, 8]])
        np.testing.assert_array_equal(ds.y, [3, 6, 9.5])

    def test_target_column_in_middle(self, tmp_path):
        ds = load_csv(_write(tmp_path, "a,t,b\n1,2,3\n"), "t")
        assert ds.feature_names == ("a", "b")
        np.testing.assert_array_equal(ds.X, [[1, 3]])

    def test_non_numeric_names_row(self, tmp_path):
        p = _write(tmp_path, "a,b,t\n1,2,3\n4,5,abc\n")
        with pytest.raises(DataError, match=r"line 3.*'t'"):
            load_csv(p, "t")

    def test_header_only(self, tmp_path):
        with pytest.raises(DataError, match="no data rows"):
            load_csv(_write(tmp_path, "a,b,t\n"), "t")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="no such file"):
            load_csv(tmp_path / "nope.csv", "t")

    def test_missing_target(self, tmp_path):
        with pytest.raises(DataError, match="target column"):
            load_csv(_write(tmp_path, "a,b\n1,2\n"), "t")

    def test_ragged_row(self, tmp_path):
        with pytest.raises(DataError, match="cells"):
            load_csv(_write(tmp_path, "a,t\n1,2,3\n"), "t")

    def test_round_trip(self, tmp_path):
        ds = generate_synthetic(50, 3, 2.0, seed=4)
        write_csv(ds, tmp_path / "s.csv")
        assert load_csv(tmp_path / "s.csv", "target").equals(ds)


class TestKurtosis:
    def test_normal(self):
        x = np.random.default_rng(0).standard_normal(10**6)
        assert kurtosis(x) == pytest.approx(3.0, abs=0.1)

    def test_two_point(self):
        assert kurtosis([-1, 1, -1, 1]) == 1.0

    def test_uniform_against_quadrature(self):
        # independent route: moments of U(0,1) by numerical integration
        m2 = integrate.quad(lambda u: (u - 0.5) ** 2, 0, 1)[0]
        m4 = integrate.quad(lambda u: (u - 0.5) ** 4, 0, 1)[0]
        expected = m4 / m2**2
        assert expected == pytest.approx(1.8, abs=1e-9)
        x = np.random.default_rng(1).uniform(size=10**6)
        assert kurtosis(x) == pytest.approx(expected, abs=0.05)

    def test_matches_scipy(self):
        x = np.random.default_rng(2).lognormal(size=1000)
        assert kurtosis(x) == pytest.approx(stats.kurtosis(x, fisher=False, bias=True), rel=1e-10)

    @pytest.mark.parametrize("values", [[5, 5, 5, 5], [1, 2, 3], [0.1] * 10])
    def test_undefined(self, values):
        with pytest.raises(UndefinedKurtosisError):
            kurtosis(values)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=40),
        st.floats(0.01, 100) | st.floats(-100, -0.01),
        st.floats(-1e3, 1e3),
    )
    def test_affine_invariance(self, xs, a, b):
        x = np.array(xs)
        if np.ptp(x) < 1e-3:
            return
        assert kurtosis(a * x + b) == pytest.approx(kurtosis(x), rel=1e-9)


class TestCcdf:
    def test_counting(self):
        assert ccdf_points([1, 2, 3]) == [(1.0, 1.0), (2.0, pytest.approx(2 / 3)), (3.0, pytest.approx(1 / 3))]

    def test_ties(self):
        assert ccdf_points([5, 5]) == [(5.0, 1.0)]

    def test_ten(self):
        pts = ccdf_points(range(10))
        assert len(pts) == 10 and pts[-1][1] == pytest.approx(0.1)

    def test_empty(self):
        with pytest.raises(L2PError):
            ccdf_points([])

    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=50))
    def test_monotone(self, xs):
        pts = ccdf_points(xs)
        fr = [f for _, f in pts]
        assert fr[0] == 1.0
        assert all(a >= b for a, b in zip(fr, fr[1:]))
        assert fr[-1] == pytest.approx(xs.count(max(xs)) / len(xs))


def _toy(n, y=None):
    y = np.arange(n, dtype=float) if y is None else y
    return Dataset(np.arange(n), np.zeros((n, 1)), y, ["x"])


class TestStratifiedKfold:
    def test_even_sizes(self):
        fa = stratified_kfold(_toy(10), k=5, n_strata=1, seed=0)
        assert fa.sizes().tolist() == [2] * 5

    def test_extremes_spread(self):
        y = np.concatenate([np.ones(90), 1000.0 + np.arange(10)])
        ds = _toy(100, y)
        fa = stratified_kfold(ds, k=5, n_strata=10, seed=3)
        extreme = fa.folds[y >= 1000]
        # brute-force count per fold
        assert [int(np.sum(extreme == f)) for f in range(5)] == [2] * 5

    def test_deterministic(self):
        ds = generate_synthetic(60, 2, 2.0, seed=1)
        a = stratified_kfold(ds, 5, 10, seed=9)
        b = stratified_kfold(ds, 5, 10, seed=9)
        assert a.fold_of == b.fold_of
        assert stratified_kfold(ds, 5, 10, seed=10).fold_of != a.fold_of

    def test_k_gt_n(self):
        with pytest.raises(L2PError):
            stratified_kfold(_toy(3), k=5)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 80), st.integers(2, 7), st.integers(1, 12), st.integers(0, 10**6))
    def test_partition(self, n, k, n_strata, seed):
        if k > n:
            return
        ds = _toy(n, np.random.default_rng(seed).pareto(1.5, n))
        fa = stratified_kfold(ds, k, n_strata, seed)
        test_sets = [set(ds.ids[t].tolist()) for _, t in fa.splits()]
        assert set().union(*test_sets) == set(ds.ids.tolist())
        assert sum(len(s) for s in test_sets) == n
        assert np.ptp(fa.sizes()) <= n_strata


class TestSynthetic:
    def test_heavy_tail(self):
        ds = generate_synthetic(4096, 9, 1.5, noise_scale=0.0, seed=0)
        assert kurtosis(ds.y) > 30

    def test_noiseless_monotone(self):
        ds = generate_synthetic(300, 4, 2.0, noise_scale=0.0, seed=5)
        w = synthetic_weights(4, seed=5)
        assert np.all(w > 0)
        rho = stats.spearmanr(ds.X @ w, ds.y).statistic
        assert rho == pytest.approx(1.0)

    def test_deterministic(self):
        assert generate_synthetic(40, 3, 1.5, 0.2, seed=7).equals(generate_synthetic(40, 3, 1.5, 0.2, seed=7))
        assert not generate_synthetic(40, 3, 1.5, 0.2, seed=7).equals(generate_synthetic(40, 3, 1.5, 0.2, seed=8))

    def test_bad_tail(self):
        with pytest.raises(L2PError):
            generate_synthetic(40, 3, 0.0)

    def test_kurtosis_monotone_in_tail_index(self):
        med = []
        for a in (1.2, 2.0, 3.0):
            med.append(np.median([kurtosis(generate_synthetic(10**4, 2, a, seed=s).y) for s in range(5)]))
        assert med[0] > med[1] > med[2]
