"""Pairwise training examples: every comparable pair, or a rank-aware sample."""
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from l2p._random import rng_for
from l2p.data import Dataset
from l2p.errors import L2PError, NoPairsError


@dataclass(frozen=True)
class PairExample:
    left_id: int
    right_id: int
    features: np.ndarray
    label: int


@dataclass(frozen=True, eq=False)
class PairSet:
    """Column-oriented collection of pair examples.

    Row r compares instance ``left_ids[r]`` with ``right_ids[r]``; ``X[r]`` is
    the left feature vector followed by the right one and ``y[r]`` is +1 when
    the left target is larger.
    """

    left_ids: np.ndarray
    right_ids: np.ndarray
    X: np.ndarray
    y: np.ndarray

    def __len__(self):
        return self.y.size

    def __getitem__(self, r) -> PairExample:
        return PairExample(int(self.left_ids[r]), int(self.right_ids[r]), self.X[r], int(self.y[r]))

    def __iter__(self) -> Iterator[PairExample]:
        for r in range(len(self)):
            yield self[r]

    @classmethod
    def from_examples(cls, examples) -> "PairSet":
        examples = list(examples)
        if not examples:
            return cls(np.empty(0, np.int64), np.empty(0, np.int64), np.empty((0, 0)), np.empty(0, np.int8))
        return cls(
            left_ids=np.array([e.left_id for e in examples], dtype=np.int64),
            right_ids=np.array([e.right_id for e in examples], dtype=np.int64),
            X=np.array([np.asarray(e.features, dtype=float) for e in examples]),
            y=np.array([e.label for e in examples], dtype=np.int8),
        )


@dataclass(frozen=True)
class FullPairing:
    pass


@dataclass(frozen=True)
class SampledPairing:
    """Compare each instance with ``k`` rank neighbours plus ``n_s - k`` random others."""

    n_s: int
    k: int

    def __post_init__(self):
        if not 0 <= self.k <= self.n_s:
            raise L2PError(f"sampled pairing needs 0 <= k <= n_s, got k={self.k}, n_s={self.n_s}")


PairingPolicy = Union[FullPairing, SampledPairing]


def _assemble(train: Dataset, a: np.ndarray, b: np.ndarray) -> PairSet:
    ta, tb = train.y[a], train.y[b]
    keep = ta != tb
    a, b = a[keep], b[keep]
    if a.size == 0:
        raise NoPairsError("no comparable pairs: all targets are tied")
    return PairSet(
        left_ids=train.ids[a],
        right_ids=train.ids[b],
        X=np.hstack([train.X[a], train.X[b]]),
        y=np.where(train.y[a] > train.y[b], 1, -1).astype(np.int8),
    )


def build_full_pairs(train: Dataset) -> PairSet:
    """One orientation (i < j by position) per unordered pair; ties skipped."""
    a, b = np.triu_indices(train.n, k=1)
    return _assemble(train, a, b)


def build_sampled_pairs(train: Dataset, policy: SampledPairing, seed: int = 0) -> PairSet:
    n = train.n
    if policy.n_s >= n:
        raise L2PError(f"n_s={policy.n_s} must be smaller than the training size {n}")
    order = np.lexsort((train.ids, train.y))
    up, down = -(-policy.k // 2), policy.k // 2
    n_random = policy.n_s - policy.k
    firsts, seconds = [], []
    for r, i in enumerate(order):
        neighbours = np.concatenate([order[r + 1:r + 1 + up], order[max(0, r - down):r]])
        chosen = neighbours
        if n_random > 0:
            eligible = np.ones(n, dtype=bool)
            eligible[neighbours] = False
            eligible[i] = False
            candidates = np.flatnonzero(eligible)
            rng = rng_for(seed, "pairs", int(train.ids[i]))
            picked = rng.choice(candidates, size=min(n_random, candidates.size), replace=False)
            chosen = np.concatenate([neighbours, picked])
        firsts.append(np.full(chosen.size, i))
        seconds.append(chosen)
    a = np.concatenate(firsts)
    b = np.concatenate(seconds)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    code = np.unique(lo.astype(np.int64) * n + hi)
    return _assemble(train, code // n, code % n)


def build_pairs(train: Dataset, policy: PairingPolicy = FullPairing(), seed: int = 0) -> PairSet:
    if isinstance(policy, SampledPairing):
        return build_sampled_pairs(train, policy, seed)
    return build_full_pairs(train)


def as_pair_set(pairs) -> PairSet:
    if isinstance(pairs, PairSet):
        return pairs
    return PairSet.from_examples(pairs)
