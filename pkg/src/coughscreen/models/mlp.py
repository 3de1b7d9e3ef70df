"""Fully connected softmax classifier trained by backpropagation.

The network maps ``n_features -> hidden... -> 2`` and minimizes the mean
softmax cross-entropy. Weights are He-uniform initialized from ``seed``; the
mini-batch order is drawn from the same generator, so a fixed seed gives a
bit-identical model.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..errors import DimensionMismatch, InvalidParams, UnsupportedFormatVersion
from .common import FORMAT_VERSION, as_matrix, check_training_data

N_CLASSES = 2
ACTIVATIONS = ("relu", "tanh", "logistic", "identity")
SOLVERS = ("adam", "sgd", "lbfgs")
SCHEDULES = ("constant", "invscaling", "adaptive")


@dataclass(frozen=True)
class MLPParams:
    hidden_layer_sizes: tuple[int, ...] = (300, 128, 64)
    activation: str = "relu"
    solver: str = "adam"
    learning_rate: str = "constant"
    learning_rate_init: float = 1e-3
    max_epochs: int = 200
    batch_size: int | None = None
    tol: float = 1e-4
    n_iter_no_change: int = 10
    beta_1: float = 0.9
    beta_2: float = 0.999
    epsilon: float = 1e-8
    momentum: float = 0.9
    power_t: float = 0.5
    l2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_layer_sizes", tuple(int(h) for h in self.hidden_layer_sizes))
        if any(h < 1 for h in self.hidden_layer_sizes):
            raise InvalidParams("every layer width must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise InvalidParams(f"activation must be one of {ACTIVATIONS}")
        if self.solver not in SOLVERS:
            raise InvalidParams(f"solver must be one of {SOLVERS}")
        if self.learning_rate not in SCHEDULES:
            raise InvalidParams(f"learning_rate must be one of {SCHEDULES}")
        if self.learning_rate_init <= 0 or self.max_epochs < 1:
            raise InvalidParams("learning_rate_init and max_epochs must be positive")
        if self.batch_size is not None and self.batch_size < 1:
            raise InvalidParams("batch_size must be >= 1")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return self.hidden_layer_sizes + (N_CLASSES,)

    @classmethod
    def from_dict(cls, d: dict) -> "MLPParams":
        d = dict(d)
        if "hidden_layer_sizes" in d:
            d["hidden_layer_sizes"] = tuple(d["hidden_layer_sizes"])
        return cls(**d)


def _act(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "logistic":
        return 0.5 * (1.0 + np.tanh(0.5 * z))
    return z


def _act_grad(name, z, a):
    """Derivative of the activation, given pre-activation ``z`` and output ``a``."""
    if name == "relu":
        return (z > 0).astype(z.dtype)
    if name == "tanh":
        return 1.0 - a * a
    if name == "logistic":
        return a * (1.0 - a)
    return np.ones_like(z)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(weights, biases, X, activation="relu"):
    """Return (pre-activations, activations); the last activation is the softmax."""
    zs, acts = [], [X]
    a = X
    for i, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        zs.append(z)
        a = softmax(z) if i == len(weights) - 1 else _act(activation, z)
        acts.append(a)
    return zs, acts


def loss_and_grads(weights, biases, X, y, activation="relu", l2=0.0):
    """Mean cross-entropy (plus ``l2/2 * sum W**2``) and its exact gradients."""
    n = X.shape[0]
    zs, acts = forward(weights, biases, X, activation)
    proba = acts[-1]
    loss = -np.mean(np.log(np.clip(proba[np.arange(n), y], 1e-300, None)))
    if l2:
        loss += 0.5 * l2 * sum(float(np.sum(W * W)) for W in weights)

    delta = proba.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    gW = [None] * len(weights)
    gb = [None] * len(weights)
    for i in range(len(weights) - 1, -1, -1):
        gW[i] = acts[i].T @ delta + l2 * weights[i]
        gb[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ weights[i].T) * _act_grad(activation, zs[i - 1], acts[i])
    return loss, gW, gb


def init_params(layer_sizes, rng):
    """He-uniform weights, zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def pack(weights, biases) -> np.ndarray:
    return np.concatenate([p.ravel() for pair in zip(weights, biases) for p in pair])


def unpack(theta, layer_sizes):
    weights, biases = [], []
    pos = 0
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(theta[pos:pos + fan_in * fan_out].reshape(fan_in, fan_out))
        pos += fan_in * fan_out
        biases.append(theta[pos:pos + fan_out])
        pos += fan_out
    return weights, biases


@dataclass
class MLPModel:
    weights: list
    biases: list
    params: MLPParams
    feature_kind: str | None = None
    training_seed: int = 0
    train_metrics: dict = field(default_factory=dict)

    family = "mlp"

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]

    def predict_proba(self, X) -> np.ndarray:
        """Class probabilities, columns ``(negative, positive)``."""
        X = as_matrix(X)
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"model expects {self.n_features} features, got {X.shape[1]}")
        return forward(self.weights, self.biases, X, self.params.activation)[1][-1]

    def decision_scores(self, X) -> np.ndarray:
        return self.predict_proba(X)[:, 1]

    def predict(self, X) -> np.ndarray:
        p = self.predict_proba(X)
        # Ties go to the negative class.
        return (p[:, 1] > p[:, 0]).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "family": "mlp",
            "feature_kind": self.feature_kind,
            "training_seed": self.training_seed,
            "params": {**asdict(self.params), "hidden_layer_sizes": list(self.params.hidden_layer_sizes)},
            "layer_shapes": [list(W.shape) for W in self.weights],
            "weights": [W.ravel().tolist() for W in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "train_metrics": self.train_metrics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MLPModel":
        if d.get("format_version") != FORMAT_VERSION:
            raise UnsupportedFormatVersion(f"unsupported model format_version {d.get('format_version')!r}")
        shapes = [tuple(s) for s in d["layer_shapes"]]
        weights = [np.asarray(w, dtype=np.float64).reshape(s) for w, s in zip(d["weights"], shapes)]
        biases = [np.asarray(b, dtype=np.float64) for b in d["biases"]]
        return cls(weights, biases, MLPParams.from_dict(d["params"]), d.get("feature_kind"),
                   d.get("training_seed", 0), d.get("train_metrics", {}))


class _Adam:
    def __init__(self, shapes, p: MLPParams):
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.p = p
        self.t = 0

    def steps(self, grads, lr):
        self.t += 1
        b1, b2 = self.p.beta_1, self.p.beta_2
        scale = lr * np.sqrt(1 - b2 ** self.t) / (1 - b1 ** self.t)
        out = []
        for m, v, g in zip(self.m, self.v, grads):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            out.append(-scale * m / (np.sqrt(v) + self.p.epsilon))
        return out


class _SGD:
    def __init__(self, shapes, p: MLPParams):
        self.vel = [np.zeros(s) for s in shapes]
        self.mu = p.momentum

    def steps(self, grads, lr):
        out = []
        for vel, g in zip(self.vel, grads):
            vel *= self.mu
            vel -= lr * g
            out.append(vel.copy())
        return out


def mlp_train(X, y, params: MLPParams = MLPParams(), feature_kind=None) -> MLPModel:
    """Fit the network; returns an :class:`MLPModel` with the loss curve recorded."""
    X, y = check_training_data(X, y)
    p = params
    rng = np.random.default_rng(p.seed)
    sizes = (X.shape[1],) + p.layer_sizes
    weights, biases = init_params(sizes, rng)

    if p.solver == "lbfgs":
        def fun(theta):
            W, b = unpack(theta, sizes)
            loss, gW, gb = loss_and_grads(W, b, X, y, p.activation, p.l2)
            return loss, pack(gW, gb)

        res = minimize(fun, pack(weights, biases), jac=True, method="L-BFGS-B",
                       options={"maxiter": p.max_epochs, "gtol": 1e-10, "ftol": p.tol * 1e-3})
        weights, biases = unpack(res.x.copy(), sizes)
        curve = [float(res.fun)]
        stopped = "converged" if res.success else "max_epochs"
    else:
        weights, biases, curve, stopped = _minibatch(X, y, p, rng, weights, biases)

    model = MLPModel(weights, biases, p, feature_kind, p.seed)
    acc = float(np.mean(model.predict(X) == y))
    model.train_metrics = {"loss": curve[-1], "epochs": len(curve), "stop": stopped,
                           "train_accuracy": acc, "loss_curve": curve}
    return model


def _minibatch(X, y, p: MLPParams, rng, weights, biases):
    n = X.shape[0]
    batch = min(200, n) if p.batch_size is None else min(p.batch_size, n)
    params = weights + biases
    k = len(weights)
    opt = _Adam([w.shape for w in params], p) if p.solver == "adam" else _SGD([w.shape for w in params], p)
    lr = p.learning_rate_init
    best = np.inf
    stale = 0
    curve = []
    step = 0
    stopped = "max_epochs"
    for _ in range(p.max_epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            loss, gW, gb = loss_and_grads(params[:k], params[k:], X[idx], y[idx], p.activation, p.l2)
            total += loss * len(idx)
            if p.solver == "sgd" and p.learning_rate == "invscaling":
                lr = p.learning_rate_init / (step + 1) ** p.power_t
            for param, delta in zip(params, opt.steps(gW + gb, lr)):
                param += delta
            step += 1
        epoch_loss = total / n
        curve.append(float(epoch_loss))
        if not np.isfinite(epoch_loss):
            stopped = "diverged"
            break
        if epoch_loss > best - p.tol:
            stale += 1
        else:
            stale = 0
        best = min(best, epoch_loss)
        if p.n_iter_no_change and stale >= p.n_iter_no_change:
            if p.solver == "sgd" and p.learning_rate == "adaptive" and lr > 1e-6:
                lr /= 5.0
                stale = 0
                continue
            stopped = "converged"
            break
    return params[:k], params[k:], curve, stopped


def mlp_predict_proba(model: MLPModel, x) -> np.ndarray:
    """Softmax pair ``(p_negative, p_positive)`` for a single vector."""
    values = getattr(x, "values", x)
    return model.predict_proba(np.asarray(values, dtype=np.float64)[None, :])[0]
