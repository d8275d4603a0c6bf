"""Cross-validated comparison of L2P against the kNN and shuffled baselines."""
from dataclasses import asdict, dataclass, field

import numpy as np

from l2p._random import sub_seed
from l2p.baselines import KnnConfig, knn_predict_many, random_baseline
from l2p.classifier import ForestConfig, train_forest
from l2p.data import Dataset, FoldAssignment, stratified_kfold
from l2p.errors import L2PError
from l2p.metrics import evaluate
from l2p.pairs import FullPairing, PairingPolicy, SampledPairing, build_pairs
from l2p.placement import PLAIN, VOTE_MODES, predict_many

METHODS = ("l2p", "knn", "random")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    forest: ForestConfig = ForestConfig()
    pairing: PairingPolicy = FullPairing()
    vote_mode: str = PLAIN
    n_folds: int = 5
    n_strata: int = 10
    knn: KnnConfig = KnnConfig()

    def __post_init__(self):
        if self.vote_mode not in VOTE_MODES:
            raise L2PError(f"unknown vote mode {self.vote_mode!r}")

    def to_dict(self) -> dict:
        pairing = ({"mode": "sampled", "n_s": self.pairing.n_s, "k": self.pairing.k}
                   if isinstance(self.pairing, SampledPairing) else {"mode": "full"})
        forest = asdict(self.forest)
        forest.pop("n_jobs")  # execution detail, must not leak into reports
        return {
            "seed": self.seed,
            "forest": forest,
            "pairing": pairing,
            "vote_mode": self.vote_mode,
            "n_folds": self.n_folds,
            "n_strata": self.n_strata,
            "knn": asdict(self.knn),
        }


@dataclass
class CVResult:
    dataset: Dataset
    config: RunConfig
    folds: FoldAssignment
    predictions: dict
    pair_counts: list
    fold_reports: dict = field(default_factory=dict)
    pooled: dict = field(default_factory=dict)

    def auc_summary(self, method: str):
        aucs = np.array([r.auc for r in self.fold_reports[method]])
        return float(aucs.mean()), float(aucs.std())

    def to_dict(self) -> dict:
        methods = {}
        for m in METHODS:
            mean, std = self.auc_summary(m)
            methods[m] = {
                "folds": [r.to_dict() for r in self.fold_reports[m]],
                "pooled": self.pooled[m].to_dict(),
                "auc_mean": mean,
                "auc_std": std,
            }
        return {
            "dataset": {"n": self.dataset.n, "d": self.dataset.d, "target": self.dataset.target_name},
            "config": self.config.to_dict(),
            "folds": {"k": self.folds.k, "sizes": self.folds.sizes().tolist()},
            "training_pairs": list(self.pair_counts),
            "methods": methods,
        }


def cross_validate(dataset: Dataset, config: RunConfig = RunConfig(), methods=METHODS) -> CVResult:
    """Stratified k-fold run; every fold's randomness comes from (seed, label, fold)."""
    folds = stratified_kfold(dataset, config.n_folds, config.n_strata, config.seed)
    preds = {m: np.full(dataset.n, np.nan) for m in methods}
    pair_counts = []
    fold_reports = {m: [] for m in methods}
    for f, (train_pos, test_pos) in enumerate(folds.splits()):
        train = dataset.subset(train_pos)
        Q = dataset.X[test_pos]
        actual = dataset.y[test_pos]
        if "l2p" in methods:
            pairs = build_pairs(train, config.pairing, sub_seed(config.seed, "pairs", f))
            pair_counts.append(len(pairs))
            model = train_forest(pairs, config.forest, sub_seed(config.seed, "forest", f))
            preds["l2p"][test_pos] = [p.predicted_value for p in predict_many(model, train, Q, config.vote_mode)]
        if "knn" in methods:
            preds["knn"][test_pos] = knn_predict_many(train, Q, config.knn)
        if "random" in methods:
            preds["random"][test_pos] = random_baseline(actual, sub_seed(config.seed, "random", f))
        for m in methods:
            fold_reports[m].append(evaluate(actual, preds[m][test_pos]))
    pooled = {m: evaluate(dataset.y, preds[m]) for m in methods}
    return CVResult(dataset, config, folds, preds, pair_counts, fold_reports, pooled)

