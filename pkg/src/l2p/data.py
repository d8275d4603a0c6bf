"""Datasets, CSV ingestion, fold assignment and target-distribution summaries."""
import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from l2p._random import rng_for
from l2p.errors import DataError, L2PError, UndefinedKurtosisError


class Instance(NamedTuple):
    id: int
    features: np.ndarray
    target: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix plus a real-valued target, one row per instance.

    Instances are addressed by ``ids`` (integers, unique); positions in the
    arrays are an implementation detail that subsetting does not preserve.
    """

    ids: np.ndarray
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple
    target_name: str = "target"

    def __post_init__(self):
        X = np.array(self.X, dtype=float, ndmin=2)
        y = np.array(self.y, dtype=float).ravel()
        ids = np.array(self.ids, dtype=np.int64).ravel()
        if X.shape[0] != y.size or ids.size != y.size:
            raise DataError(f"inconsistent sizes: X {X.shape}, y {y.size}, ids {ids.size}")
        if X.shape[1] != len(self.feature_names):
            raise DataError(f"{len(self.feature_names)} feature names for {X.shape[1]} columns")
        if np.unique(ids).size != ids.size:
            raise DataError("instance ids must be unique")
        if not np.all(np.isfinite(y)):
            raise DataError("targets must be finite")
        if not np.all(np.isfinite(X)):
            raise DataError("features must be finite")
        for arr in (X, y, ids):
            arr.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @classmethod
    def from_instances(cls, instances: Sequence[Instance], feature_names, target_name="target"):
        d = len(feature_names)
        X = np.array([inst.features for inst in instances], dtype=float).reshape(len(instances), d)
        return cls(
            ids=[inst.id for inst in instances],
            X=X,
            y=[inst.target for inst in instances],
            feature_names=feature_names,
            target_name=target_name,
        )

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.n

    def __iter__(self) -> Iterator[Instance]:
        for i in range(self.n):
            yield self.instance(i)

    def instance(self, pos: int) -> Instance:
        return Instance(int(self.ids[pos]), self.X[pos], float(self.y[pos]))

    def subset(self, positions) -> "Dataset":
        positions = np.asarray(positions, dtype=np.int64)
        return Dataset(self.ids[positions], self.X[positions], self.y[positions],
                       self.feature_names, self.target_name)

    def equals(self, other: "Dataset") -> bool:
        return (
            self.feature_names == other.feature_names
            and self.target_name == other.target_name
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )


def _read_table(path):
    """Header plus float rows of a numeric CSV; blank lines are skipped."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file (header row required)")
        header = [h.strip() for h in header]
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            line = reader.line_num
            if len(row) != len(header):
                raise DataError(f"{path}: row at line {line} has {len(row)} cells, expected {len(header)}")
            values = []
            for name, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric cell {cell!r} at line {line}, column {name!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(f"{path}: non-finite cell {cell!r} at line {line}, column {name!r}")
                values.append(v)
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: dataset has no data rows")
    return header, np.array(rows, dtype=float)


def load_csv(path, target_column: str) -> Dataset:
    """Read a header-first numeric CSV; every non-target column is a feature.

    Instance ids are the 0-based data-row positions.
    """
    header, table = _read_table(path)
    if target_column not in header:
        raise DataError(f"{path}: target column {target_column!r} not in header {header}")
    t_col = header.index(target_column)
    feature_cols = [j for j in range(len(header)) if j != t_col]
    return Dataset(
        ids=np.arange(table.shape[0]),
        X=table[:, feature_cols],
        y=table[:, t_col],
        feature_names=[header[j] for j in feature_cols],
        target_name=target_column,
    )


def load_query_csv(path, feature_names) -> np.ndarray:
    """Feature matrix of a query CSV, columns picked by name; other columns are ignored."""
    header, table = _read_table(path)
    missing = [name for name in feature_names if name not in header]
    if missing:
        raise DataError(f"{path}: query file lacks feature columns {missing}")
    return table[:, [header.index(name) for name in feature_names]]


def write_csv(dataset: Dataset, path) -> None:
    """Inverse of :func:`load_csv`: features in order, target as last column."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(dataset.feature_names) + [dataset.target_name])
        for row, t in zip(dataset.X, dataset.y):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(t))])


def kurtosis(values) -> float:
    """Pearson kurtosis m4 / m2**2 from population moments (normal -> 3)."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 4:
        raise UndefinedKurtosisError(f"kurtosis needs at least 4 values, got {x.size}")
    dev = x - x.mean()
    m2 = np.mean(dev**2)
    if m2 == 0.0 or m2 <= (np.finfo(float).eps * np.max(np.abs(x))) ** 2:
        raise UndefinedKurtosisError("kurtosis is undefined for zero variance")
    return float(np.mean(dev**4) / m2**2)


def ccdf_points(values) -> list:
    """(value, fraction of sample >= value) for each distinct value, ascending."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise L2PError("ccdf of an empty sample")
    uniq, first = np.unique(x, return_index=True)
    frac = (x.size - first) / x.size
    return [(float(u), float(f)) for u, f in zip(uniq, frac)]


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    ids: np.ndarray
    folds: np.ndarray
    k: int

    @property
    def fold_of(self) -> dict:
        return {int(i): int(f) for i, f in zip(self.ids, self.folds)}

    def sizes(self):
        return np.bincount(self.folds, minlength=self.k)

    def splits(self):
        """Yield (train_positions, test_positions) for each fold in order."""
        for f in range(self.k):
            yield np.flatnonzero(self.folds != f), np.flatnonzero(self.folds == f)


def stratified_kfold(dataset: Dataset, k: int = 5, n_strata: int = 10, seed: int = 0) -> FoldAssignment:
    """Quantile-stratified k-fold assignment for a continuous target.

    Instances are sorted by target and cut into ``n_strata`` contiguous
    strata; each stratum is shuffled and dealt round-robin to the folds, the
    dealing position carrying over between strata so fold sizes stay within
    one of each other. Every fold therefore sees its share of the tail.
    """
    n = dataset.n
    if k < 2:
        raise L2PError(f"k must be >= 2, got {k}")
    if n_strata < 1:
        raise L2PError(f"n_strata must be >= 1, got {n_strata}")
    if k > n:
        raise L2PError(f"cannot split {n} instances into {k} folds")
    rng = rng_for(seed, "stratified_kfold")
    order = np.lexsort((dataset.ids, dataset.y))
    folds = np.empty(n, dtype=np.int64)
    dealt = 0
    for stratum in np.array_split(order, min(n_strata, n)):
        stratum = rng.permutation(stratum)
        folds[stratum] = (dealt + np.arange(stratum.size)) % k
        dealt += stratum.size
    return FoldAssignment(ids=dataset.ids.copy(), folds=folds, k=k)


def synthetic_weights(d: int, seed: int = 0) -> np.ndarray:
    """Latent-score weights used by :func:`generate_synthetic`: Exponential(1) draws.

    Their spread leaves a few features dominant and the rest weakly relevant.
    """
    return rng_for(seed, "synthetic", "weights").exponential(1.0, size=d)


def generate_synthetic(n: int, d: int, tail_index: float, noise_scale: float = 0.1, seed: int = 0) -> Dataset:
    """Heavy-tailed dataset whose target is predictable from the features.

    Features are i.i.d. uniform on [0, 1]. A latent score is the features
    weighted by :func:`synthetic_weights` plus Gaussian noise with standard
    deviation ``noise_scale * std(score)``; the target is the Pareto(shape =
    ``tail_index``, scale 1) quantile at each instance's mid-rank of the noisy
    score, so the target distribution is exactly Pareto-shaped and its order
    follows the score.
    """
    if n < 10:
        raise L2PError(f"n must be >= 10, got {n}")
    if d < 1:
        raise L2PError(f"d must be >= 1, got {d}")
    if not tail_index > 0:
        raise L2PError(f"tail_index must be positive, got {tail_index}")
    if noise_scale < 0:
        raise L2PError(f"noise_scale must be non-negative, got {noise_scale}")
    weights = synthetic_weights(d, seed)
    X = rng_for(seed, "synthetic", "features").uniform(0.0, 1.0, size=(n, d))
    score = X @ weights
    if noise_scale > 0:
        score = score + rng_for(seed, "synthetic", "noise").normal(0.0, noise_scale * score.std(), size=n)
    rank = np.empty(n, dtype=np.int64)
    rank[np.argsort(score, kind="stable")] = np.arange(n)
    u = (rank + 0.5) / n
    y = (1.0 - u) ** (-1.0 / tail_index)
    return Dataset(
        ids=np.arange(n),
        X=X,
        y=y,
        feature_names=[f"x{j}" for j in range(d)],
        target_name="target",
    )
