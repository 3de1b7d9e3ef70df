from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, NonFiniteInput, SingleClassData, UnknownLabel

FORMAT_VERSION = 1

_POSITIVE = {"positive", "pos", "1", "+1", "covid-19 positive", "true"}
_NEGATIVE = {"negative", "neg", "0", "-1", "covid-19 negative", "false"}


def encode_labels(y) -> np.ndarray:
    """Map labels to 0 (negative) / 1 (positive).

    Accepts ``{0, 1}``, ``{-1, +1}`` or the strings ``positive``/``negative``.
    """
    out = np.empty(len(y), dtype=np.int64)
    for i, v in enumerate(y):
        if isinstance(v, str):
            s = v.strip().lower()
            if s in _POSITIVE:
                out[i] = 1
            elif s in _NEGATIVE:
                out[i] = 0
            else:
                raise UnknownLabel(f"unknown label {v!r}")
        else:
            if v == 1:
                out[i] = 1
            elif v in (0, -1):
                out[i] = 0
            else:
                raise UnknownLabel(f"unknown label {v!r}")
    return out


def as_matrix(X) -> np.ndarray:
    """Stack feature vectors (arrays or objects with ``values``) into a float matrix."""
    if len(X) and hasattr(X[0], "values") and not isinstance(X, np.ndarray):
        X = [x.values for x in X]
    try:
        X = np.asarray(X, dtype=np.float64)
    except ValueError as exc:
        raise DimensionMismatch(f"feature vectors have unequal lengths: {exc}") from None
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D feature matrix, got shape {X.shape}")
    return X


def check_training_data(X, y):
    X = as_matrix(X)
    y = encode_labels(y)
    if len(X) != len(y):
        raise DimensionMismatch(f"{len(X)} feature rows but {len(y)} labels")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("training features contain NaN or Inf")
    if len(np.unique(y)) < 2:
        raise SingleClassData("training data must contain both classes")
    return X, y
