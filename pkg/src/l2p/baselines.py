"""Reference predictors: k-nearest-neighbour regression and shuffled targets."""
from dataclasses import dataclass

import numpy as np

from l2p._random import as_rng
from l2p.data import Dataset
from l2p.errors import DimensionMismatchError, L2PError


@dataclass(frozen=True)
class KnnConfig:
    k: int = 5
    metric: str = "euclidean"

    def __post_init__(self):
        if self.k < 1:
            raise L2PError(f"k must be >= 1, got {self.k}")
        if self.metric != "euclidean":
            raise L2PError(f"unsupported metric {self.metric!r}")


def knn_predict_many(train: Dataset, queries, config: KnnConfig = KnnConfig()) -> np.ndarray:
    """Unweighted mean target of the k nearest training rows for every query.

    Equal distances are resolved in favour of the smaller instance id.
    """
    if train.n == 0:
        raise L2PError("empty training set")
    if config.k > train.n:
        raise L2PError(f"k={config.k} exceeds the training size {train.n}")
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    if Q.shape[1] != train.d:
        raise DimensionMismatchError(f"query dimension {Q.shape[1]} != training dimension {train.d}")
    by_id = np.argsort(train.ids, kind="stable")
    X, y = train.X[by_id], train.y[by_id]
    out = np.empty(Q.shape[0])
    for r, q in enumerate(Q):
        dist = np.sqrt(np.sum((X - q) ** 2, axis=1))
        nearest = np.argsort(dist, kind="stable")[:config.k]
        out[r] = y[nearest].mean()
    return out


def knn_predict(train: Dataset, q, config: KnnConfig = KnnConfig()) -> float:
    return float(knn_predict_many(train, np.asarray(q, dtype=float)[None, :], config)[0])


def random_baseline(actual, seed=0) -> np.ndarray:
    """The actual outcomes in a seeded random order (``seed``: int or Generator)."""
    actual = np.asarray(actual, dtype=float).ravel()
    if actual.size == 0:
        raise L2PError("random baseline of an empty sample")
    return as_rng(seed, "random_baseline").permutation(actual)
