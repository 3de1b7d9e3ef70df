"""The six train/test scenarios and the split -> train -> score pipeline."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientData, InvalidParams
from ..models import train_model
from ..models.common import as_matrix, encode_labels
from .metrics import MetricsReport, confusion_metrics, roc_auc
from .split import stratified_split

COUGHVID, VIRUFY, BOTH = "COUGHVID", "Virufy", "Both"
SOURCES = (COUGHVID, VIRUFY, BOTH)


@dataclass(frozen=True)
class ScenarioSpec:
    id: int
    train_source: str
    test_source: str
    split_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if (self.train_source, self.test_source) not in _PAIRS:
            raise InvalidParams(f"({self.train_source}, {self.test_source}) is not one of the six scenarios")

    @property
    def description(self) -> str:
        return f"train on {self.train_source}, test on {self.test_source}"


_PAIRS = {
    (COUGHVID, COUGHVID): 1,
    (VIRUFY, VIRUFY): 2,
    (BOTH, VIRUFY): 3,
    (BOTH, COUGHVID): 4,
    (BOTH, BOTH): 5,
    (COUGHVID, VIRUFY): 6,
}
SCENARIO_PAIRS = {v: k for k, v in _PAIRS.items()}


def scenario(sid: int, seed: int = 0, split_fraction: float = 0.8) -> ScenarioSpec:
    if sid not in SCENARIO_PAIRS:
        raise InvalidParams(f"scenario id must be 1..6, got {sid}")
    train, test = SCENARIO_PAIRS[sid]
    return ScenarioSpec(sid, train, test, split_fraction, seed)


def _source_mask(datasets, source):
    datasets = np.asarray(datasets)
    if source == BOTH:
        return np.ones(len(datasets), dtype=bool)
    return datasets == source


def partition(spec: ScenarioSpec, labels, datasets, groups=None, grouped: bool = True):
    """Index arrays ``(train, test)`` for one scenario.

    Where the train and test sources overlap, the overlapping data is split
    ``split_fraction`` / rest (grouped by recording when ``grouped``); the
    non-overlapping part of a "Both" side is used in full.
    """
    labels = encode_labels(labels)
    datasets = np.asarray(datasets)
    groups = np.asarray(groups) if (grouped and groups is not None) else None
    tr_mask = _source_mask(datasets, spec.train_source)
    te_mask = _source_mask(datasets, spec.test_source)
    shared = np.flatnonzero(tr_mask & te_mask)
    if len(shared) == 0:
        train, test = np.flatnonzero(tr_mask), np.flatnonzero(te_mask)
    else:
        sub_tr, sub_te = stratified_split(labels[shared], spec.split_fraction, spec.seed,
                                          None if groups is None else groups[shared])
        test = shared[sub_te]
        train = np.sort(np.concatenate([shared[sub_tr], np.flatnonzero(tr_mask & ~te_mask)]))
    if len(train) == 0 or len(test) == 0:
        raise InsufficientData(f"scenario {spec.id} has an empty side "
                               f"(train={len(train)}, test={len(test)})")
    return train, test


def minmax_fit(X):
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    span = np.where(span > 0, span, 1.0)
    return lo, span


def run_scenario(spec: ScenarioSpec, vectors, feature_kind: str, model_family: str, params=None,
                 feature_scaling: str = "none", grouped: bool = True, return_model: bool = False):
    """Split, train, predict and score one scenario cell.

    ``vectors`` are :class:`FeatureVector` objects carrying label, dataset
    and parent-recording group. Scores for AUC are the positive-class
    probability (MLP) or the raw decision value (SVM).
    """
    X = as_matrix([v.values for v in vectors])
    y = encode_labels([v.label for v in vectors])
    datasets = [v.dataset for v in vectors]
    groups = [v.group or v.segment_ref for v in vectors]
    train, test = partition(spec, y, datasets, groups, grouped)

    Xtr, Xte = X[train], X[test]
    if feature_scaling == "minmax":
        lo, span = minmax_fit(Xtr)
        Xtr, Xte = (Xtr - lo) / span, (Xte - lo) / span
    elif feature_scaling != "none":
        raise InvalidParams(f"feature_scaling must be 'none' or 'minmax', got {feature_scaling!r}")

    if isinstance(params, dict) or params is None:
        params = dict(params or {})
        if model_family == "mlp":
            params.setdefault("seed", spec.seed)
    model = train_model(model_family, Xtr, y[train], params, feature_kind)
    pred = model.predict(Xte)
    scores = model.decision_scores(Xte)
    conf = confusion_metrics(y[test], pred)
    auc = roc_auc(y[test], scores) if len(np.unique(y[test])) == 2 else None
    report = MetricsReport(spec.id, str(feature_kind), model_family, spec.seed, conf, auc,
                           n_train=len(train), n_test=len(test),
                           extra={"train_source": spec.train_source, "test_source": spec.test_source,
                                  "feature_scaling": feature_scaling, "grouped": grouped})
    if return_model:
        return report, model
    return report
