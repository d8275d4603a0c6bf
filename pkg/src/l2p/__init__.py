"""Learning to Place: regression for heavy-tailed targets via pairwise preferences.

Stage one trains a classifier on instance pairs to predict which target is
larger; stage two places a new instance among the sorted training targets by
letting every training instance vote on where it belongs.
"""
from l2p.baselines import KnnConfig, knn_predict, knn_predict_many, random_baseline
from l2p.classifier import (
    ForestConfig,
    PreferenceModel,
    RandomForest,
    classifier_accuracy,
    predict_pair,
    train_forest,
)
from l2p.data import (
    Dataset,
    Instance,
    ccdf_points,
    generate_synthetic,
    kurtosis,
    load_csv,
    stratified_kfold,
    write_csv,
)
from l2p.errors import (
    DataError,
    DimensionMismatchError,
    L2PError,
    NoPairsError,
    UndefinedKurtosisError,
    UndefinedRateError,
)
from l2p.evaluation import CVResult, RunConfig, cross_validate
from l2p.metrics import MetricReport, emd, evaluate, fpr_at, ks_statistic, qq_points, roc_auc, tpr_at
from l2p.pairs import FullPairing, PairExample, PairSet, SampledPairing, build_full_pairs, build_pairs
from l2p.placement import PLAIN, WEIGHTED, BinPartition, Placement, build_partition, explain, place, predict, vote
from l2p.robustness import DistanceError, RandomError, inject_errors, oracle_labels, robustness_sweep

__all__ = [
    "BinPartition", "CVResult", "DataError", "Dataset", "DimensionMismatchError", "DistanceError",
    "ForestConfig", "FullPairing", "Instance", "KnnConfig", "L2PError", "MetricReport", "NoPairsError",
    "PLAIN", "PairExample", "PairSet", "Placement", "PreferenceModel", "RandomError", "RandomForest",
    "RunConfig", "SampledPairing", "UndefinedKurtosisError", "UndefinedRateError", "WEIGHTED",
    "build_full_pairs", "build_pairs", "build_partition", "ccdf_points", "classifier_accuracy",
    "cross_validate", "emd", "evaluate", "explain", "fpr_at", "generate_synthetic", "inject_errors",
    "knn_predict", "knn_predict_many", "ks_statistic", "kurtosis", "load_csv", "oracle_labels", "place",
    "predict", "predict_pair", "qq_points", "random_baseline", "robustness_sweep", "roc_auc",
    "stratified_kfold", "tpr_at", "train_forest", "vote", "write_csv",
]
