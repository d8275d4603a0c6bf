"""Distribution-level and threshold-level scores for heavy-tailed predictions."""
from dataclasses import dataclass

import numpy as np

from l2p.errors import L2PError, UndefinedRateError


def _sample(a, name="sample") -> np.ndarray:
    a = np.asarray(a, dtype=float).ravel()
    if a.size == 0:
        raise L2PError(f"{name} is empty")
    return a


def _ecdf(sample_sorted, at) -> np.ndarray:
    return np.searchsorted(sample_sorted, at, side="right") / sample_sorted.size


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    a = np.sort(_sample(a, "a"))
    b = np.sort(_sample(b, "b"))
    support = np.concatenate([a, b])
    return float(np.max(np.abs(_ecdf(a, support) - _ecdf(b, support))))


def _emd_ecdf(a, b) -> float:
    """Integral of |F_a - F_b| over the merged support."""
    a = np.sort(a)
    b = np.sort(b)
    support = np.unique(np.concatenate([a, b]))
    gaps = np.diff(support)
    diff = np.abs(_ecdf(a, support[:-1]) - _ecdf(b, support[:-1]))
    return float(np.sum(diff * gaps))


def _emd_sorted(a, b) -> float:
    """Mean |a_(i) - b_(i)| over order statistics; equal sizes only."""
    return float(np.mean(np.abs(np.sort(a) - np.sort(b))))


def emd(a, b) -> float:
    """One-dimensional earth mover's (Wasserstein-1) distance."""
    a = _sample(a, "a")
    b = _sample(b, "b")
    if a.size == b.size:
        return _emd_sorted(a, b)
    return _emd_ecdf(a, b)


def _aligned(actual, predicted):
    y = _sample(actual, "actual")
    yhat = _sample(predicted, "predicted")
    if y.size != yhat.size:
        raise L2PError(f"actual ({y.size}) and predicted ({yhat.size}) differ in length")
    return y, yhat


def tpr_at(actual, predicted, t: float) -> float:
    """Share of instances with actual >= t that are also predicted >= t."""
    y, yhat = _aligned(actual, predicted)
    pos = y >= t
    if not pos.any():
        raise UndefinedRateError(f"no actual value >= {t}")
    return float(np.mean(yhat[pos] >= t))


def fpr_at(actual, predicted, t: float) -> float:
    """Share of instances with actual < t that are nevertheless predicted >= t."""
    y, yhat = _aligned(actual, predicted)
    neg = y < t
    if not neg.any():
        raise UndefinedRateError(f"no actual value < {t}")
    return float(np.mean(yhat[neg] >= t))


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Threshold sweep points sorted by (fpr, tpr); anchors carry +inf / -inf thresholds."""

    fpr: np.ndarray
    tpr: np.ndarray
    threshold: np.ndarray
    auc: float

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist(), self.threshold.tolist()))


def roc_auc(actual, predicted) -> RocCurve:
    """ROC over thresholds t = every distinct actual value.

    At each t both the actual and the predicted values are thresholded, so
    the points are not guaranteed to be monotone in t. Thresholds where
    either rate is 0/0 are dropped, the (0, 0) and (1, 1) anchors added, the
    points sorted by (fpr, tpr) and integrated with the trapezoid rule.
    """
    y, yhat = _aligned(actual, predicted)
    ts = np.unique(y)
    if ts.size < 2:
        raise L2PError("roc needs at least 2 distinct actual values")
    # counts of actual / predicted >= t for every t, via sorted positions
    ys = np.sort(y)
    n_pos = y.size - np.searchsorted(ys, ts, side="left")
    n_neg = y.size - n_pos
    # true positives at t: yhat >= t and y >= t; sweep over min(y, yhat) >= t
    both = np.sort(np.minimum(y, yhat))
    tp = y.size - np.searchsorted(both, ts, side="left")
    pred_pos = y.size - np.searchsorted(np.sort(yhat), ts, side="left")
    fp = pred_pos - tp
    ok = (n_pos > 0) & (n_neg > 0)
    tpr = tp[ok] / n_pos[ok]
    fpr = fp[ok] / n_neg[ok]
    fpr = np.concatenate([[0.0], fpr, [1.0]])
    tpr = np.concatenate([[0.0], tpr, [1.0]])
    thr = np.concatenate([[np.inf], ts[ok], [-np.inf]])
    order = np.lexsort((tpr, fpr))
    fpr, tpr, thr = fpr[order], tpr[order], thr[order]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(fpr, tpr, thr, auc)


def qq_points(actual, predicted, n_quantiles: int = 100) -> np.ndarray:
    """(actual quantile, predicted quantile) at levels i / (n_quantiles + 1)."""
    y = _sample(actual, "actual")
    yhat = _sample(predicted, "predicted")
    if n_quantiles < 2:
        raise L2PError(f"n_quantiles must be >= 2, got {n_quantiles}")
    levels = np.arange(1, n_quantiles + 1) / (n_quantiles + 1)
    return np.column_stack([np.quantile(y, levels), np.quantile(yhat, levels)])


@dataclass(frozen=True, eq=False)
class MetricReport:
    ks: float
    emd: float
    auc: float
    qq: np.ndarray
    roc: RocCurve

    def to_dict(self) -> dict:
        return {"ks": self.ks, "emd": self.emd, "auc": self.auc}


def evaluate(actual, predicted, n_quantiles: int = 100) -> MetricReport:
    roc = roc_auc(actual, predicted)
    return MetricReport(
        ks=ks_statistic(actual, predicted),
        emd=emd(actual, predicted),
        auc=roc.auc,
        qq=qq_points(actual, predicted, n_quantiles),
        roc=roc,
    )
