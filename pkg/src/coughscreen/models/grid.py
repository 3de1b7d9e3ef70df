"""Hyper-parameter sweeps over the MLP and SVM search spaces."""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import CoughScreenError, InvalidParams
from .common import check_training_data
from .mlp import MLPParams
from .svm import KERNELS

log = logging.getLogger(__name__)

MLP_HIDDEN_LAYOUTS = (
    (300,), (128,), (64,), (300, 300), (128, 128), (64, 64), (300, 128),
    (300, 64), (128, 64), (300, 128, 64), (300, 128, 64, 2),
)


def svm_gamma_values() -> list[float]:
    """0 to 1 in steps of 0.02; 0 itself is listed and later skipped as invalid."""
    return [round(0.02 * k, 10) for k in range(51)]


def svm_c_values() -> list[float]:
    return [float(c) for c in range(1, 100, 5)]


def svm_search_space(kernels=KERNELS) -> dict:
    return {"kernel": list(kernels), "gamma": svm_gamma_values(), "C": svm_c_values()}


def mlp_search_space() -> dict:
    return {
        "hidden_layer_sizes": [list(h) for h in MLP_HIDDEN_LAYOUTS],
        "solver": ["lbfgs", "sgd", "adam"],
        "learning_rate": ["constant", "invscaling", "adaptive"],
        "activation": ["identity", "logistic", "tanh", "relu"],
    }


def expand_grid(grid) -> list[dict]:
    """A dict of lists becomes its cartesian product (keys in insertion order); a list passes through."""
    if isinstance(grid, dict):
        keys = list(grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    return [dict(g) for g in grid]


@dataclass
class GridCell:
    params: dict
    status: str  # "ok", "failed", "skipped"
    accuracy: float = 0.0
    f1: float = 0.0
    n_parameters: int = 0
    message: str = ""

    def to_dict(self) -> dict:
        return {"params": self.params, "status": self.status, "accuracy": self.accuracy,
                "f1": self.f1, "n_parameters": self.n_parameters, "message": self.message}


@dataclass
class GridResult:
    family: str
    best_params: dict
    best_index: int
    cells: list[GridCell] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"family": self.family, "best_params": self.best_params, "best_index": self.best_index,
                "cells": [c.to_dict() for c in self.cells]}


def _is_degenerate(family: str, params: dict) -> str | None:
    if family == "svm":
        kernel = params.get("kernel", "rbf")
        if kernel != "linear" and not params.get("gamma", 0.4) > 0:
            return f"gamma={params.get('gamma')} is invalid for the {kernel} kernel"
        if not params.get("C", 20.0) > 0:
            return f"C={params.get('C')} must be positive"
    return None


def _param_count(family, params, n_features) -> int:
    if family == "mlp":
        # Read widths directly so a cell whose params failed validation still gets a count.
        hidden = tuple(int(h) for h in params.get("hidden_layer_sizes", MLPParams().hidden_layer_sizes))
        sizes = (n_features,) + hidden + (2,)
        return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))
    return 0


def _evaluate(args):
    from ..evaluation.metrics import confusion_metrics
    from . import train_model

    family, params, Xtr, ytr, Xva, yva = args
    try:
        model = train_model(family, Xtr, ytr, params)
        m = confusion_metrics(yva, model.predict(Xva))
        return "ok", m.accuracy, m.positive.f1, ""
    except (CoughScreenError, ValueError, FloatingPointError) as exc:
        return "failed", 0.0, 0.0, f"{type(exc).__name__}: {exc}"


def grid_search(X, y, family: str, grid, seed: int = 0, groups=None, fixed: dict | None = None,
                jobs: int = 1) -> GridResult:
    """Score every configuration on one stratified 80/20 validation split.

    The winner maximizes accuracy, then positive-class F1, then prefers a
    smaller ``C`` (SVM) or fewer weights (MLP), then earlier grid position.
    Invalid points (e.g. ``gamma == 0``) are skipped with a warning; cells
    whose training raises score 0 and are marked ``failed``.
    """
    from ..evaluation.split import stratified_split

    configs = expand_grid(grid)
    if not configs:
        raise InvalidParams("grid is empty")
    X, y = check_training_data(X, y)
    tr, va = stratified_split(y, 0.8, seed, groups)
    fixed = dict(fixed or {})
    if family == "mlp":
        fixed.setdefault("seed", seed)

    cells: list[GridCell | None] = [None] * len(configs)
    jobs_list = []
    for i, cfg in enumerate(configs):
        params = {**fixed, **cfg}
        reason = _is_degenerate(family, params)
        if reason:
            log.warning("skipping grid point %s: %s", cfg, reason)
            cells[i] = GridCell(cfg, "skipped", message=reason)
            continue
        jobs_list.append((i, cfg, (family, params, X[tr], y[tr], X[va], y[va])))

    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_evaluate, [j[2] for j in jobs_list]))
    else:
        outcomes = [_evaluate(j[2]) for j in jobs_list]

    for (i, cfg, args), (status, acc, f1, msg) in zip(jobs_list, outcomes):
        if status == "failed":
            log.warning("grid point %s failed: %s", cfg, msg)
        cells[i] = GridCell(cfg, status, acc, f1, _param_count(family, args[1], X.shape[1]), msg)

    scored = [i for i, c in enumerate(cells) if c.status != "skipped"]
    if not scored:
        raise InvalidParams("every grid point was skipped as invalid")

    def rank(i):
        c = cells[i]
        size = c.params.get("C", 0.0) if family == "svm" else c.n_parameters
        return (-c.accuracy, -c.f1, size, i)

    best = min(scored, key=rank)
    return GridResult(family, dict(configs[best]), best, cells)
