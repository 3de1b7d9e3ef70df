"""Confusion-matrix metrics and exact ROC AUC."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import LengthMismatch, SingleClassData, NonFiniteInput
from ..models.common import encode_labels


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ConfusionMetrics:
    tp: int
    fp: int
    fn: int
    tn: int
    positive: ClassMetrics
    negative: ClassMetrics
    flags: tuple[str, ...] = ()

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        """Percent correct."""
        return 100.0 * (self.tp + self.tn) / self.total

    @property
    def macro_f1(self) -> float:
        return 0.5 * (self.positive.f1 + self.negative.f1)

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
                "accuracy": self.accuracy,
                "positive": asdict(self.positive), "negative": asdict(self.negative),
                "flags": list(self.flags)}


def _ratio(num, den, flag, flags):
    if den == 0:
        flags.append(flag)
        return 0.0
    return num / den


def _class_block(hit, false_alarm, miss, name, flags) -> ClassMetrics:
    p = _ratio(hit, hit + false_alarm, f"{name}.precision_undefined", flags)
    r = _ratio(hit, hit + miss, f"{name}.recall_undefined", flags)
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return ClassMetrics(p, r, f1)


def confusion_metrics(y_true, y_pred) -> ConfusionMetrics:
    """Counts and per-class precision/recall/F1; "positive" is the positive class.

    A ratio with a zero denominator is reported as 0 and named in ``flags``.
    """
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} labels vs {len(y_pred)} predictions")
    if len(y_true) == 0:
        raise LengthMismatch("need at least one example")
    t = encode_labels(y_true)
    p = encode_labels(y_pred)
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    tn = int(np.sum((t == 0) & (p == 0)))
    flags: list[str] = []
    pos = _class_block(tp, fp, fn, "positive", flags)
    neg = _class_block(tn, fn, fp, "negative", flags)
    return ConfusionMetrics(tp, fp, fn, tn, pos, neg, tuple(flags))


def roc_auc(y_true, scores) -> float:
    """Area under the ROC curve as the Mann-Whitney statistic.

    ``P(score_pos > score_neg) + 0.5 * P(tie)``, counted exactly over tied
    score groups.
    """
    y = encode_labels(y_true)
    s = np.asarray(scores, dtype=np.float64)
    if len(y) != len(s):
        raise LengthMismatch(f"{len(y)} labels vs {len(s)} scores")
    if not np.all(np.isfinite(s)):
        raise NonFiniteInput("scores must be finite")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassData("AUC needs both classes")
    order = np.argsort(s, kind="mergesort")
    s, y = s[order], y[order]
    starts = np.flatnonzero(np.concatenate([[True], s[1:] != s[:-1]]))
    pos_in = np.add.reduceat(y, starts)
    size = np.diff(np.concatenate([starts, [len(s)]]))
    neg_in = size - pos_in
    neg_below = np.concatenate([[0], np.cumsum(neg_in)[:-1]])
    wins = int(np.sum(pos_in * neg_below))
    ties = int(np.sum(pos_in * neg_in))
    return (wins + 0.5 * ties) / (n_pos * n_neg)


def roc_curve(y_true, scores):
    """(fpr, tpr) points sweeping the threshold from +inf down, one point per distinct score."""
    y = encode_labels(y_true)
    s = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    last = np.flatnonzero(np.concatenate([s[1:] != s[:-1], [True]]))
    tps = np.cumsum(y)[last]
    fps = (last + 1) - tps
    tpr = np.concatenate([[0.0], tps / max(y.sum(), 1)])
    fpr = np.concatenate([[0.0], fps / max(len(y) - y.sum(), 1)])
    return fpr, tpr


@dataclass
class MetricsReport:
    scenario_id: int | None
    feature_kind: str
    model_family: str
    seed: int
    confusion: ConfusionMetrics
    auc: float | None
    n_train: int = 0
    n_test: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def accuracy(self) -> float:
        return self.confusion.accuracy

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "scenario_id": self.scenario_id,
            "feature_kind": self.feature_kind,
            "model_family": self.model_family,
            "seed": self.seed,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "accuracy": self.accuracy,
            "auc": self.auc,
            "counts": {k: getattr(self.confusion, k) for k in ("tp", "fp", "fn", "tn")},
            "per_class": {"positive": asdict(self.confusion.positive),
                          "negative": asdict(self.confusion.negative)},
            "flags": list(self.confusion.flags),
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        c = d["counts"]
        conf = ConfusionMetrics(c["tp"], c["fp"], c["fn"], c["tn"],
                                ClassMetrics(**d["per_class"]["positive"]),
                                ClassMetrics(**d["per_class"]["negative"]), tuple(d.get("flags", ())))
        return cls(d.get("scenario_id"), d["feature_kind"], d["model_family"], d["seed"], conf,
                   d.get("auc"), d.get("n_train", 0), d.get("n_test", 0), d.get("extra", {}))
