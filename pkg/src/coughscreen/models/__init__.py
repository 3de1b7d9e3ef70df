from .common import encode_labels
from .mlp import MLPModel, MLPParams, loss_and_grads, mlp_predict_proba, mlp_train
from .serialize import dumps, load_model, loads, save_model
from .svm import SVMModel, SVMParams, kernel_matrix, smo_solve, svm_decision, svm_train_smo

FAMILIES = ("mlp", "svm")


def make_params(family: str, overrides: dict | None = None):
    overrides = dict(overrides or {})
    if family == "mlp":
        return MLPParams.from_dict(overrides)
    if family == "svm":
        return SVMParams.from_dict(overrides)
    raise ValueError(f"unknown model family {family!r}; expected one of {FAMILIES}")


def train_model(family: str, X, y, params=None, feature_kind=None):
    """Train either classifier; ``params`` may be a params object or a dict of overrides."""
    if params is None or isinstance(params, dict):
        params = make_params(family, params)
    if family == "mlp":
        return mlp_train(X, y, params, feature_kind)
    if family == "svm":
        return svm_train_smo(X, y, params, feature_kind)
    raise ValueError(f"unknown model family {family!r}")


__all__ = [
    "FAMILIES", "MLPModel", "MLPParams", "SVMModel", "SVMParams", "dumps",
    "encode_labels", "kernel_matrix", "load_model", "loads", "loss_and_grads",
    "make_params", "mlp_predict_proba", "mlp_train", "save_model", "smo_solve",
    "svm_decision", "svm_train_smo", "train_model",
]
