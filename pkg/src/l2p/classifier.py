"""Pairwise preference classifier: a random forest of Gini CART trees.

Any object with ``n_features``, ``predict_prob`` and ``predict_label`` (see
:class:`PreferenceModel`) can stand in for the forest in the placement stage.
"""
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Protocol, runtime_checkable

import numpy as np

from l2p import _tree
from l2p._random import rng_for
from l2p.errors import DimensionMismatchError, L2PError
from l2p.pairs import as_pair_set

FORMAT = "l2p.forest"
FORMAT_VERSION = 1


@runtime_checkable
class PreferenceModel(Protocol):
    n_features: int

    def predict_prob(self, X) -> np.ndarray:
        """Probability that each row's left instance has the larger target."""

    def predict_label(self, X) -> np.ndarray:
        """+1 / -1 per row; +1 exactly when predict_prob >= 0.5."""


def labels_from_prob(prob) -> np.ndarray:
    return np.where(np.asarray(prob) >= 0.5, 1, -1).astype(np.int8)


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_features: Optional[int] = None  # None: ceil(sqrt(n_features))
    min_samples_leaf: int = 1
    max_depth: Optional[int] = None
    bootstrap: bool = True
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_trees < 1:
            raise L2PError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_samples_leaf < 1:
            raise L2PError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.max_depth is not None and self.max_depth < 0:
            raise L2PError(f"max_depth must be >= 0, got {self.max_depth}")

    def resolved_max_features(self, n_features: int) -> int:
        mf = math.ceil(math.sqrt(n_features)) if self.max_features is None else self.max_features
        if not 1 <= mf <= n_features:
            raise L2PError(f"max_features must be in [1, {n_features}], got {mf}")
        return mf


@dataclass(frozen=True, eq=False)
class Tree:
    """Flat CART tree; ``feature[i] == -1`` marks node i as a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    prob: np.ndarray
    n_samples: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def apply(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=float)
        roots = np.zeros(1, dtype=np.int64)
        return _tree.apply_trees(X, roots, self.feature, self.threshold, self.left, self.right)[:, 0]

    def predict_prob(self, X) -> np.ndarray:
        return self.prob[self.apply(X)]

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != _tree.LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())


class RandomForest:
    """Trained forest; probability is the mean of the trees' leaf probabilities."""

    def __init__(self, trees, n_features: int, config: ForestConfig = ForestConfig()):
        self.trees = list(trees)
        self.n_features = int(n_features)
        self.config = config
        offsets = np.cumsum([0] + [t.n_nodes for t in self.trees])
        self._roots = offsets[:-1].astype(np.int64)
        self._feature = np.concatenate([t.feature for t in self.trees])
        self._threshold = np.concatenate([t.threshold for t in self.trees])
        self._prob = np.concatenate([t.prob for t in self.trees])
        shift = lambda child, off: np.where(child == _tree.LEAF, _tree.LEAF, child + off)
        self._left = np.concatenate([shift(t.left, o) for t, o in zip(self.trees, self._roots)])
        self._right = np.concatenate([shift(t.right, o) for t, o in zip(self.trees, self._roots)])

    def _check(self, X):
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
        if X.shape[1] != self.n_features:
            raise DimensionMismatchError(f"model expects {self.n_features} pair features, got {X.shape[1]}")
        return X

    def predict_prob(self, X) -> np.ndarray:
        X = self._check(X)
        return _tree.forest_prob(X, self._roots, self._feature, self._threshold, self._left, self._right,
                                 self._prob)

    def predict_label(self, X) -> np.ndarray:
        return labels_from_prob(self.predict_prob(X))

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "n_features": self.n_features,
            "config": asdict(self.config),
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "prob": t.prob.tolist(),
                    "n_samples": t.n_samples.tolist(),
                }
                for t in self.trees
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RandomForest":
        if doc.get("format") != FORMAT or doc.get("version") != FORMAT_VERSION:
            raise L2PError(f"not an {FORMAT} v{FORMAT_VERSION} document")
        trees = [
            Tree(
                feature=np.array(t["feature"], dtype=np.int64),
                threshold=np.array(t["threshold"], dtype=float),
                left=np.array(t["left"], dtype=np.int64),
                right=np.array(t["right"], dtype=np.int64),
                prob=np.array(t["prob"], dtype=float),
                n_samples=np.array(t["n_samples"], dtype=np.int64),
            )
            for t in doc["trees"]
        ]
        return cls(trees, doc["n_features"], ForestConfig(**doc["config"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "RandomForest":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _encode_columns(X):
    n, F = X.shape
    uniques, inverses = [], []
    for f in range(F):
        u, inv = np.unique(X[:, f], return_inverse=True)
        uniques.append(u)
        inverses.append(inv.ravel())
    dtype = np.uint16 if max(u.size for u in uniques) <= np.iinfo(np.uint16).max else np.int64
    codes = np.ascontiguousarray(np.array(inverses, dtype=dtype))
    n_codes = np.array([u.size for u in uniques], dtype=np.int64)
    values = np.zeros((F, int(n_codes.max())))
    for f, u in enumerate(uniques):
        values[f, :u.size] = u
    return codes, n_codes, values


def train_forest(pairs, config: ForestConfig = ForestConfig(), seed: int = 0) -> RandomForest:
    """Fit ``config.n_trees`` trees, each on its own seeded bootstrap resample.

    Tree t draws its resample and feature subsets from the stream
    (seed, "forest", t), so results do not depend on ``n_jobs``.
    """
    ps = as_pair_set(pairs)
    if len(ps) == 0:
        raise L2PError("cannot train on an empty pair list")
    X = np.ascontiguousarray(ps.X, dtype=float)
    y01 = (np.asarray(ps.y) > 0).astype(np.uint8)
    m, F = X.shape
    max_features = config.resolved_max_features(F)
    max_depth = -1 if config.max_depth is None else config.max_depth
    codes, n_codes, values = _encode_columns(X)

    def grow(t):
        rng = rng_for(seed, "forest", t)
        if config.bootstrap:
            weights = np.bincount(rng.integers(0, m, size=m), minlength=m).astype(np.int64)
        else:
            weights = np.ones(m, dtype=np.int64)
        tree_seed = int(rng.integers(0, 2**31 - 1))
        arrays = _tree.build_tree(codes, n_codes, values, y01, weights, max_features,
                                  config.min_samples_leaf, max_depth, tree_seed)
        return Tree(*arrays)

    if config.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=config.n_jobs) as pool:
            trees = list(pool.map(grow, range(config.n_trees)))
    else:
        trees = [grow(t) for t in range(config.n_trees)]
    return RandomForest(trees, F, config)


def predict_pair(model: PreferenceModel, f_i, f_q):
    """(label, probability) that instance i's target exceeds the query's."""
    f_i = np.asarray(f_i, dtype=float).ravel()
    f_q = np.asarray(f_q, dtype=float).ravel()
    if f_i.size != f_q.size or f_i.size + f_q.size != model.n_features:
        raise DimensionMismatchError(
            f"feature lengths {f_i.size} and {f_q.size} do not match model input {model.n_features}"
        )
    p = float(model.predict_prob(np.concatenate([f_i, f_q])[None, :])[0])
    return (1 if p >= 0.5 else -1), p


def classifier_accuracy(model: PreferenceModel, pairs) -> float:
    ps = as_pair_set(pairs)
    if len(ps) == 0:
        raise L2PError("accuracy of an empty pair list")
    return float(np.mean(model.predict_label(ps.X) == ps.y))
