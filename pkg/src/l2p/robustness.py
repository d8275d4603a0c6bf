"""How much pairwise error can the voting stage absorb?

The learned classifier is replaced by ground-truth comparisons that are then
corrupted on purpose, either uniformly at random or more often for pairs
that sit close together in rank, and the resulting placements are scored.
"""
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from l2p._random import as_rng
from l2p.data import Dataset, stratified_kfold
from l2p.errors import L2PError
from l2p.metrics import roc_auc
from l2p.placement import PLAIN, VoteTally, _tally_rows, build_partition, place


@dataclass(frozen=True)
class RandomError:
    """Every comparison flips independently with probability ``p_c``."""

    p_c: float
    name = "random"

    def __post_init__(self):
        if not 0.0 <= self.p_c <= 1.0:
            raise L2PError(f"p_c must lie in [0, 1], got {self.p_c}")

    @property
    def parameter(self) -> float:
        return self.p_c

    def flip_probability(self, ranks, q_rank) -> np.ndarray:
        return np.full(np.shape(ranks), self.p_c)


@dataclass(frozen=True)
class DistanceError:
    """Comparison with instance i flips with probability exp(-alpha * |r_i - r_q|).

    Ranks are percentiles scaled to [0, 1].
    """

    alpha: float
    name = "distance"

    def __post_init__(self):
        if not self.alpha >= 0.0:
            raise L2PError(f"alpha must be non-negative, got {self.alpha}")

    @property
    def parameter(self) -> float:
        return self.alpha

    def flip_probability(self, ranks, q_rank) -> np.ndarray:
        return np.exp(-self.alpha * np.abs(np.asarray(ranks, dtype=float) - q_rank))


ErrorMechanism = Union[RandomError, DistanceError]
MECHANISMS = {"random": RandomError, "distance": DistanceError}


def oracle_labels(train_targets, q_target: float) -> np.ndarray:
    """+1 where the training target exceeds the query's, -1 where below, 0 on ties."""
    if not np.isfinite(q_target):
        raise L2PError("query target must be finite")
    return np.sign(np.asarray(train_targets, dtype=float) - q_target).astype(np.int8)


def rank_percentiles(targets) -> np.ndarray:
    """Tie-averaged rank of each target scaled to [0, 1]."""
    t = np.asarray(targets, dtype=float).ravel()
    if t.size < 2:
        return np.zeros(t.size)
    _, inv, counts = np.unique(t, return_inverse=True, return_counts=True)
    first = np.concatenate([[0], np.cumsum(counts)[:-1]])
    avg_rank = first + (counts - 1) / 2.0
    return avg_rank[inv.ravel()] / (t.size - 1)


def query_percentile(train_targets, q_target: float) -> float:
    """Position of a query target on the same [0, 1] scale as :func:`rank_percentiles`."""
    t = np.asarray(train_targets, dtype=float).ravel()
    if t.size < 2:
        return 0.0
    less = np.count_nonzero(t < q_target)
    equal = np.count_nonzero(t == q_target)
    return float(np.clip((less + 0.5 * equal - 0.5) / (t.size - 1), 0.0, 1.0))


def inject_errors(labels, ranks, q_rank: float, mechanism: ErrorMechanism, seed=0):
    """Flip labels per ``mechanism``; returns (corrupted labels, realized flip fraction).

    Abstaining (0) labels are never flipped and do not count toward the
    fraction. Draws depend only on the seed and the label count, so running
    the same call on its own output restores the input.
    """
    labels = np.asarray(labels).ravel()
    ranks = np.asarray(ranks, dtype=float).ravel()
    if ranks.size != labels.size:
        raise L2PError(f"{ranks.size} ranks for {labels.size} labels")
    draws = as_rng(seed, "inject_errors").random(labels.size)
    flip = (draws < mechanism.flip_probability(ranks, q_rank)) & (labels != 0)
    corrupted = np.where(flip, -labels, labels).astype(labels.dtype)
    n_voting = np.count_nonzero(labels)
    return corrupted, (float(np.count_nonzero(flip)) / n_voting if n_voting else 0.0)


@dataclass(frozen=True)
class RobustnessPoint:
    parameter: float
    realized_accuracy: float
    auc: float


@dataclass(frozen=True)
class RobustnessCurve:
    mechanism: str
    points: tuple

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["parameter", "realized_accuracy", "auc"])
            for p in self.points:
                w.writerow([repr(p.parameter), repr(p.realized_accuracy), repr(p.auc)])


def corrupted_oracle_predictions(dataset: Dataset, mechanism: ErrorMechanism, n_folds: int = 5,
                                 n_strata: int = 10, seed: int = 0, mode: str = PLAIN,
                                 stream: tuple = ()):
    """Cross-validated placements driven by corrupted ground-truth comparisons.

    Returns (predictions aligned with the dataset, total flips, total labels).
    Each held-out instance draws its corruption from its own stream keyed by
    its id, so the result does not depend on processing order.
    """
    folds = stratified_kfold(dataset, n_folds, n_strata, seed)
    pred = np.empty(dataset.n)
    flips = 0
    total = 0
    for train_pos, test_pos in folds.splits():
        t_train = dataset.y[train_pos]
        partition = build_partition(t_train, dataset.ids[train_pos])
        ranks = rank_percentiles(t_train)
        rows = np.empty((test_pos.size, train_pos.size), dtype=np.int8)
        for r, pos in enumerate(test_pos):
            q_t = dataset.y[pos]
            labels = oracle_labels(t_train, q_t)
            rng = as_rng(seed, "robustness", *stream, int(dataset.ids[pos]))
            rows[r], _ = inject_errors(labels, ranks, query_percentile(t_train, q_t), mechanism, rng)
            flips += np.count_nonzero(rows[r] != labels)
            total += np.count_nonzero(labels)
        for r, tally in enumerate(_tally_rows(partition, rows, mode=mode)):
            pred[test_pos[r]] = place(VoteTally(tally, mode), partition).predicted_value
    return pred, flips, total


def robustness_sweep(dataset: Dataset, mechanism: str, grid, n_folds: int = 5, n_strata: int = 10,
                     seed: int = 0, mode: str = PLAIN) -> RobustnessCurve:
    """AUC of corrupted-oracle placement against realized comparison accuracy.

    For each grid value the whole cross-validation is rerun; accuracy is
    1 - (flipped comparisons / all non-tied comparisons) and AUC is computed
    on the predictions pooled over folds.
    """
    if mechanism not in MECHANISMS:
        raise L2PError(f"unknown mechanism {mechanism!r}; expected one of {sorted(MECHANISMS)}")
    grid = list(grid)
    if not grid:
        raise L2PError("empty parameter grid")
    points = []
    for value in grid:
        mech = MECHANISMS[mechanism](float(value))
        pred, flips, total = corrupted_oracle_predictions(dataset, mech, n_folds, n_strata, seed, mode,
                                                          stream=(mechanism, repr(float(value))))
        accuracy = 1.0 - flips / total if total else 1.0
        points.append(RobustnessPoint(float(value), float(accuracy), roc_auc(dataset.y, pred).auc))
    return RobustnessCurve(mechanism, tuple(points))
