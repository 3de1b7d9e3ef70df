"""Soft-margin kernel SVM trained with Platt's sequential minimal optimization.

Decision function: ``f(x) = sum_i alpha_i y_i K(x_i, x) + b`` with labels in
``{-1, +1}``. The full Gram matrix is cached, which is fine for the few
thousand training points this package deals with.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import DimensionMismatch, InvalidParams, UnsupportedFormatVersion
from .common import FORMAT_VERSION, as_matrix, check_training_data

log = logging.getLogger(__name__)

KERNELS = ("linear", "poly", "rbf", "sigmoid")


@dataclass(frozen=True)
class SVMParams:
    kernel: str = "rbf"
    gamma: float = 0.4
    C: float = 20.0
    degree: int = 3
    coef0: float = 0.0
    tol: float = 1e-3
    eps: float = 1e-6
    max_passes: int = 10
    max_iter: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise InvalidParams(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if not self.C > 0:
            raise InvalidParams(f"C must be positive, got {self.C}")
        if self.kernel != "linear" and not self.gamma > 0:
            raise InvalidParams(f"gamma must be positive for the {self.kernel} kernel, got {self.gamma}")
        if self.tol <= 0 or self.eps <= 0 or self.max_passes < 1:
            raise InvalidParams("tol, eps and max_passes must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "SVMParams":
        return cls(**d)


def kernel_matrix(A, B, params: SVMParams) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if params.kernel == "rbf":
        return np.exp(-params.gamma * cdist(A, B, "sqeuclidean"))
    dot = A @ B.T
    if params.kernel == "linear":
        return dot
    if params.kernel == "poly":
        return (params.gamma * dot + params.coef0) ** params.degree
    return np.tanh(params.gamma * dot + params.coef0)


def dual_objective(alpha, y, K) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def kkt_violations(alpha, y, f, C, tol) -> np.ndarray:
    """Boolean mask of points breaking the soft-margin KKT conditions by more than ``tol``."""
    r = y * f - 1.0
    lower = alpha <= 0
    upper = alpha >= C
    free = ~(lower | upper)
    return (lower & (r < -tol)) | (upper & (r > tol)) | (free & (np.abs(r) > tol))


@dataclass
class SVMModel:
    support_vectors: np.ndarray
    alphas: np.ndarray
    labels: np.ndarray
    bias: float
    params: SVMParams
    feature_kind: str | None = None
    training_seed: int = 0
    converged: bool = True
    train_metrics: dict = field(default_factory=dict)

    family = "svm"

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def decision_function(self, X) -> np.ndarray:
        X = as_matrix(X)
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"model expects {self.n_features} features, got {X.shape[1]}")
        if len(self.alphas) == 0:
            return np.full(len(X), self.bias)
        return kernel_matrix(X, self.support_vectors, self.params) @ (self.alphas * self.labels) + self.bias

    decision_scores = decision_function

    def predict(self, X) -> np.ndarray:
        # f == 0 counts as negative.
        return (self.decision_function(X) > 0).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "family": "svm",
            "feature_kind": self.feature_kind,
            "training_seed": self.training_seed,
            "params": asdict(self.params),
            "support_vectors": self.support_vectors.tolist(),
            "alphas": self.alphas.tolist(),
            "labels": self.labels.astype(int).tolist(),
            "bias": float(self.bias),
            "converged": self.converged,
            "train_metrics": self.train_metrics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SVMModel":
        if d.get("format_version") != FORMAT_VERSION:
            raise UnsupportedFormatVersion(f"unsupported model format_version {d.get('format_version')!r}")
        sv = np.asarray(d["support_vectors"], dtype=np.float64)
        params = SVMParams.from_dict(d["params"])
        if sv.size == 0:
            sv = sv.reshape(0, int(d.get("train_metrics", {}).get("n_features", 0)))
        return cls(sv, np.asarray(d["alphas"], dtype=np.float64), np.asarray(d["labels"], dtype=np.float64),
                   float(d["bias"]), params, d.get("feature_kind"), d.get("training_seed", 0),
                   bool(d.get("converged", True)), d.get("train_metrics", {}))


class _SMO:
    """Solver state for one training run."""

    def __init__(self, K, y, p: SVMParams, track_objective=False):
        self.K = K
        self.y = y
        self.C = float(p.C)
        self.tol = p.tol
        self.eps = p.eps
        self.n = len(y)
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        # f(x_i) - y_i with alpha = 0, b = 0.
        self.E = -y.astype(np.float64)
        self.rng = np.random.default_rng(p.seed)
        self.updates = 0
        self.track = track_objective
        self.objective = [0.0] if track_objective else None

    def take_step(self, i1, i2) -> bool:
        if i1 == i2:
            return False
        K, y, C = self.K, self.y, self.C
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = y[i1], y[i2]
        E1, E2 = self.E[i1], self.E[i2]
        s = y1 * y2
        if y1 != y2:
            L, H = max(0.0, a2 - a1), min(C, C + a2 - a1)
        else:
            L, H = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        if L >= H:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2n = min(max(a2 + y2 * (E1 - E2) / eta, L), H)
        else:
            # Objective is linear (or concave) along the constraint line: pick the better end.
            f1 = y1 * (E1 - self.b) - a1 * k11 - s * a2 * k12
            f2 = y2 * (E2 - self.b) - s * a1 * k12 - a2 * k22
            L1 = a1 + s * (a2 - L)
            H1 = a1 + s * (a2 - H)
            obj_l = L1 * f1 + L * f2 + 0.5 * L1 * L1 * k11 + 0.5 * L * L * k22 + s * L * L1 * k12
            obj_h = H1 * f1 + H * f2 + 0.5 * H1 * H1 * k11 + 0.5 * H * H * k22 + s * H * H1 * k12
            if obj_l < obj_h - self.eps:
                a2n = L
            elif obj_l > obj_h + self.eps:
                a2n = H
            else:
                a2n = a2
        if abs(a2n - a2) < self.eps * (a2n + a2 + self.eps):
            return False
        a1n = a1 + s * (a2 - a2n)
        # Snap round-off onto the box.
        scale = 1e-12 * C
        a1n = 0.0 if a1n < scale else (C if a1n > C - scale else a1n)
        a2n = 0.0 if a2n < scale else (C if a2n > C - scale else a2n)

        d1, d2 = y1 * (a1n - a1), y2 * (a2n - a2)
        b1 = self.b - E1 - d1 * k11 - d2 * k12
        b2 = self.b - E2 - d1 * k12 - d2 * k22
        if 0 < a1n < C:
            bn = b1
        elif 0 < a2n < C:
            bn = b2
        else:
            bn = 0.5 * (b1 + b2)
        self.E += d1 * K[i1] + d2 * K[i2] + (bn - self.b)
        self.alpha[i1], self.alpha[i2] = a1n, a2n
        self.b = bn
        self.updates += 1
        if self.track:
            self.objective.append(dual_objective(self.alpha, y, K))
        return True

    def examine(self, i2) -> int:
        y2, a2, E2 = self.y[i2], self.alpha[i2], self.E[i2]
        r2 = E2 * y2
        if not ((r2 < -self.tol and a2 < self.C) or (r2 > self.tol and a2 > 0)):
            return 0
        free = np.flatnonzero((self.alpha > 0) & (self.alpha < self.C))
        if len(free) > 1:
            i1 = int(free[np.argmax(np.abs(self.E[free] - E2))])
            if self.take_step(i1, i2):
                return 1
        if len(free):
            for i1 in np.roll(free, -int(self.rng.integers(len(free)))):
                if self.take_step(int(i1), i2):
                    return 1
        for i1 in np.roll(np.arange(self.n), -int(self.rng.integers(self.n))):
            if self.take_step(int(i1), i2):
                return 1
        return 0

    def run(self, max_passes, max_iter) -> bool:
        examine_all = True
        changed = 0
        free_passes = 0
        while changed > 0 or examine_all:
            if self.updates >= max_iter:
                return False
            changed = 0
            if examine_all:
                for i in range(self.n):
                    changed += self.examine(i)
            else:
                for i in np.flatnonzero((self.alpha > 0) & (self.alpha < self.C)):
                    changed += self.examine(int(i))
                free_passes += 1
            if examine_all:
                examine_all = False
                free_passes = 0
            elif changed == 0 or free_passes >= max_passes:
                examine_all = True
        return True


@dataclass
class SMOResult:
    alpha: np.ndarray
    bias: float
    converged: bool
    updates: int
    objective_trace: list | None = None


def smo_solve(K, y, params: SVMParams = SVMParams(), track_objective: bool = False) -> SMOResult:
    """Run SMO on a precomputed Gram matrix ``K`` with labels ``y`` in {-1, +1}."""
    y = np.asarray(y, dtype=np.float64)
    solver = _SMO(np.asarray(K, dtype=np.float64), y, params, track_objective)
    max_iter = params.max_iter if params.max_iter is not None else max(10_000, 200 * len(y))
    converged = solver.run(params.max_passes, max_iter)
    if not converged:
        log.warning("SMO hit the update budget (%d) before satisfying KKT at tol=%g", max_iter, params.tol)
    return SMOResult(solver.alpha, final_bias(solver.alpha, y, solver.E + y - solver.b, params.C, solver.b),
                     converged, solver.updates, solver.objective)


def final_bias(alpha, y, g, C, fallback):
    """Threshold averaged over free support vectors (``g`` excludes the bias).

    Without free vectors, take the midpoint of the interval the bound
    vectors leave open.
    """
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(np.mean(y[free] - g[free]))
    r = y - g
    up = ((alpha <= 0) & (y > 0)) | ((alpha >= C) & (y < 0))
    lo_side = ((alpha <= 0) & (y < 0)) | ((alpha >= C) & (y > 0))
    lo = r[up].max() if up.any() else None
    hi = r[lo_side].min() if lo_side.any() else None
    if lo is None or hi is None:
        return float(fallback)
    return float(0.5 * (lo + hi))


def svm_train_smo(X, y, params: SVMParams = SVMParams(), feature_kind=None) -> SVMModel:
    """Solve the soft-margin dual with SMO.

    Labels may be ``{0, 1}``, ``{-1, +1}`` or ``positive``/``negative``. If
    the update budget runs out the best iterate is returned with
    ``converged=False`` and a warning is logged.
    """
    X, y01 = check_training_data(X, y)
    ys = np.where(y01 == 1, 1.0, -1.0)
    K = kernel_matrix(X, X, params)
    res = smo_solve(K, ys, params)
    f = K @ (res.alpha * ys) + res.bias
    sv = res.alpha > 0
    model = SVMModel(X[sv].copy(), res.alpha[sv].copy(), ys[sv].copy(), res.bias, params,
                     feature_kind, params.seed, res.converged)
    model.train_metrics = {
        "n_support": int(sv.sum()),
        "n_features": int(X.shape[1]),
        "updates": res.updates,
        "kkt_violations": int(kkt_violations(res.alpha, ys, f, params.C, params.tol).sum()),
        "dual_objective": dual_objective(res.alpha, ys, K),
        "train_accuracy": float(np.mean((f > 0) == (ys > 0))),
    }
    return model


def svm_decision(model: SVMModel, x) -> float:
    values = getattr(x, "values", x)
    return float(model.decision_function(np.asarray(values, dtype=np.float64)[None, :])[0])
