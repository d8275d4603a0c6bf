"""Stage two: place a query among the sorted training targets by voting.

The m distinct training targets u_1 < ... < u_m cut the target axis into
m + 1 regions: R_0 = (-inf, u_1), R_j = (u_j, u_{j+1}), R_m = (u_m, inf).
A training instance sitting at edge u_e that is predicted larger than the
query (+1) supports the regions below u_e and opposes those above it; a -1
prediction does the reverse. The region with the most support wins and the
query receives its midpoint, clamped to u_1 / u_m at the open ends.
"""
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from l2p.classifier import PreferenceModel, labels_from_prob
from l2p.data import Dataset
from l2p.errors import DimensionMismatchError, L2PError

PLAIN = "plain"
WEIGHTED = "weighted"
VOTE_MODES = (PLAIN, WEIGHTED)


@dataclass(frozen=True, eq=False)
class BinPartition:
    edges: np.ndarray
    ids: np.ndarray
    edge_index: np.ndarray
    _pos: dict = field(repr=False)

    @property
    def m(self) -> int:
        return self.edges.size

    @property
    def n_regions(self) -> int:
        return self.edges.size + 1

    @property
    def edge_instances(self) -> dict:
        """0-based edge index -> ids of the training instances at that target."""
        out = {e: [] for e in range(self.m)}
        for i, e in zip(self.ids, self.edge_index):
            out[int(e)].append(int(i))
        return out

    def bounds(self, region: int):
        lower = float(self.edges[region - 1]) if region > 0 else None
        upper = float(self.edges[region]) if region < self.m else None
        return lower, upper

    def region_value(self, region: int) -> float:
        lower, upper = self.bounds(region)
        if lower is None:
            return upper
        if upper is None:
            return lower
        return 0.5 * (lower + upper)

    def positions(self, ids) -> np.ndarray:
        try:
            return np.array([self._pos[int(i)] for i in ids], dtype=np.int64)
        except KeyError as exc:
            raise L2PError(f"unknown training instance id {exc.args[0]}") from None


def build_partition(train_targets, ids=None) -> BinPartition:
    t = np.asarray(train_targets, dtype=float).ravel()
    ids = np.arange(t.size) if ids is None else np.asarray(ids, dtype=np.int64).ravel()
    if ids.size != t.size:
        raise L2PError("ids and targets differ in length")
    edges, edge_index = np.unique(t, return_inverse=True)
    if edges.size < 2:
        raise L2PError(f"placement needs at least 2 distinct training targets, got {edges.size}")
    return BinPartition(edges, ids, edge_index.ravel().astype(np.int64),
                        {int(i): p for p, i in enumerate(ids)})


@dataclass(frozen=True, eq=False)
class VoteTally:
    votes: np.ndarray
    mode: str = PLAIN


def _aligned(partition: BinPartition, values, what: str) -> np.ndarray:
    """Values keyed by id (Mapping) or aligned with ``partition.ids`` (array)."""
    if isinstance(values, Mapping):
        if not values:
            raise L2PError(f"no {what} to vote with")
        out = np.zeros(partition.ids.size)
        out[partition.positions(values.keys())] = list(values.values())
        return out
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size != partition.ids.size:
        raise L2PError(f"{arr.size} {what} for {partition.ids.size} training instances")
    return arr


def _tally_rows(partition: BinPartition, labels, p_below=None, mode=PLAIN):
    """Vote tallies for a batch of queries: labels / p_below have shape (q, n_train).

    A label of 0 abstains. Region j receives, from an instance at edge k,
    its below-side support when j <= k and its above-side support otherwise,
    so per-edge sums plus prefix/suffix accumulation give every region.
    """
    labels = np.atleast_2d(labels)
    order = np.argsort(partition.edge_index, kind="stable")
    starts = np.searchsorted(partition.edge_index[order], np.arange(partition.m))
    per_edge = lambda a: np.add.reduceat(a[:, order], starts, axis=1)
    n_q = labels.shape[0]
    zero = np.zeros((n_q, 1))
    if mode == PLAIN:
        s = per_edge(labels.astype(np.int64))
        below = np.cumsum(s[:, ::-1], axis=1)[:, ::-1]
        return np.hstack([below, zero.astype(np.int64)]) - np.hstack([zero.astype(np.int64), np.cumsum(s, axis=1)])
    if mode != WEIGHTED:
        raise L2PError(f"unknown vote mode {mode!r}")
    if p_below is None:
        p_below = (labels + 1) / 2.0
    p_below = np.atleast_2d(p_below).astype(float)
    voting = labels != 0
    k = np.arange(partition.m)
    a = per_edge(np.where(voting, p_below, 0.0)) / (k + 1)
    b = per_edge(np.where(voting, 1.0 - p_below, 0.0)) / (partition.m - k)
    below = np.cumsum(a[:, ::-1], axis=1)[:, ::-1]
    return np.hstack([below, zero]) + np.hstack([zero, np.cumsum(b, axis=1)])


def vote(partition: BinPartition, labels, mode: str = PLAIN, probabilities=None) -> VoteTally:
    """Tally the training instances' votes over the m + 1 regions.

    ``labels`` maps training id -> +1 (instance larger than the query) or -1,
    or is an array aligned with ``partition.ids`` where 0 abstains.
    In weighted mode each instance spreads P(instance > query) evenly over
    the regions below its edge and the complement evenly over the regions
    above; ``probabilities`` defaults to the labels read as 0/1.
    """
    lab = _aligned(partition, labels, "labels")
    if not np.any(lab):
        raise L2PError("no labels to vote with")
    if mode == PLAIN:
        votes = _tally_rows(partition, lab[None, :])[0]
    elif mode == WEIGHTED:
        p = None if probabilities is None else _aligned(partition, probabilities, "probabilities")
        votes = _tally_rows(partition, lab[None, :], None if p is None else p[None, :], WEIGHTED)[0]
    else:
        raise L2PError(f"unknown vote mode {mode!r}")
    return VoteTally(votes, mode)


@dataclass(frozen=True, eq=False)
class Placement:
    region: int
    predicted_value: float
    tally: VoteTally
    lower: Optional[float]
    upper: Optional[float]
    lower_ids: tuple = ()
    upper_ids: tuple = ()
    tied_regions: tuple = ()

    def to_dict(self) -> dict:
        votes = self.tally.votes
        return {
            "region": self.region,
            "predicted_value": self.predicted_value,
            "tally": [int(v) for v in votes] if self.tally.mode == PLAIN else [float(v) for v in votes],
            "vote_mode": self.tally.mode,
            "tied_regions": list(self.tied_regions),
            "lower": self.lower,
            "upper": self.upper,
            "lower_ids": list(self.lower_ids),
            "upper_ids": list(self.upper_ids),
        }


def _winners(votes) -> np.ndarray:
    top = votes.max()
    if np.issubdtype(votes.dtype, np.integer):
        return np.flatnonzero(votes == top)
    return np.flatnonzero(votes >= top - 1e-12 * max(1.0, abs(top)))


def place(tally: VoteTally, partition: BinPartition, tie_rule: str = "average") -> Placement:
    """Pick the max-vote region; ties average the tied regions' values."""
    votes = np.asarray(tally.votes)
    if votes.size != partition.n_regions:
        raise L2PError(f"tally has {votes.size} regions, partition has {partition.n_regions}")
    winners = _winners(votes)
    if tie_rule == "average":
        value = float(np.mean([partition.region_value(j) for j in winners]))
    elif tie_rule == "lowest":
        value = partition.region_value(winners[0])
    else:
        raise L2PError(f"unknown tie rule {tie_rule!r}")
    region = int(winners[0])
    lower, upper = partition.bounds(region)
    at_edge = lambda e: tuple(int(i) for i in partition.ids[partition.edge_index == e])
    return Placement(
        region=region,
        predicted_value=value,
        tally=tally,
        lower=lower,
        upper=upper,
        lower_ids=at_edge(region - 1) if region > 0 else (),
        upper_ids=at_edge(region) if region < partition.m else (),
        tied_regions=tuple(int(j) for j in winners),
    )


def _query_rows(train: Dataset, Q: np.ndarray) -> np.ndarray:
    n, d = train.X.shape
    return np.hstack([np.tile(train.X, (Q.shape[0], 1)), np.repeat(Q, n, axis=0)])


def predict_many(model: PreferenceModel, train: Dataset, queries, mode: str = PLAIN,
                 partition: Optional[BinPartition] = None, chunk: int = 64) -> list:
    """Place every row of ``queries`` against all of ``train``.

    Each training instance i is compared through the row [f_i, f_q].
    """
    if mode not in VOTE_MODES:
        raise L2PError(f"unknown vote mode {mode!r}")
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    if Q.shape[1] != train.d or model.n_features != 2 * train.d:
        raise DimensionMismatchError(
            f"query dimension {Q.shape[1]}, training dimension {train.d}, model input {model.n_features}"
        )
    partition = partition or build_partition(train.y, train.ids)
    out = []
    for s in range(0, Q.shape[0], chunk):
        block = Q[s:s + chunk]
        prob = model.predict_prob(_query_rows(train, block)).reshape(block.shape[0], train.n)
        labels = labels_from_prob(prob)
        tallies = _tally_rows(partition, labels, prob, mode)
        out.extend(place(VoteTally(t, mode), partition) for t in tallies)
    return out


def predict(model: PreferenceModel, train: Dataset, q, mode: str = PLAIN) -> Placement:
    return predict_many(model, train, np.asarray(q, dtype=float)[None, :], mode)[0]


def _describe(train: Dataset, pos) -> dict:
    return {
        "id": int(train.ids[pos]),
        "target": float(train.y[pos]),
        "features": {name: float(v) for name, v in zip(train.feature_names, train.X[pos])},
    }


def explain(placement: Placement, train: Dataset, top_n: int = 3) -> dict:
    """Context for a placement: the bracketing instances and nearest-ranked neighbours.

    ``below`` lists up to ``top_n`` training instances at or under the lower
    bracket, nearest first; ``above`` likewise from the upper bracket up.
    A missing bracket (query placed past either end) is reported as None.
    """
    rank = np.lexsort((train.ids, train.y))
    lower, upper = placement.lower, placement.upper
    below = [p for p in rank[::-1] if lower is not None and train.y[p] <= lower][:top_n]
    above = [p for p in rank if upper is not None and train.y[p] >= upper][:top_n]
    by_id = {int(i): p for p, i in enumerate(train.ids)}

    def bracket(value, ids):
        if value is None:
            return None
        return {"target": value, "instances": [_describe(train, by_id[i]) for i in ids]}

    report = placement.to_dict()
    report["lower_bracket"] = bracket(lower, placement.lower_ids)
    report["upper_bracket"] = bracket(upper, placement.upper_ids)
    report["below"] = [_describe(train, p) for p in below]
    report["above"] = [_describe(train, p) for p in above]
    return report
