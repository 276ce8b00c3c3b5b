"""Three-layer graph convolutional network with hand-written backpropagation.

The forward pass is

    H1 = relu(A @ X @ W1 + b1)        (dropout while training)
    H2 = relu(A @ H1 @ W2 + b2)       (dropout while training)
    Z  = A @ H2 @ W3 + b3
    output = log_softmax(Z)

where A is the symmetrically normalized adjacency with self-loops. Training
minimizes the negative log-likelihood of the true class averaged over masked
nodes, optimized full-batch with Adam.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DivergenceError, EmptyMaskError, ParameterError, ShapeError
from .graph import FeatureGraph

PARAM_FIELDS = ("w1", "b1", "w2", "b2", "w3", "b3")


@dataclass(frozen=True)
class GcnParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    def __post_init__(self):
        for name in PARAM_FIELDS:
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise DivergenceError(f"parameter {name} contains non-finite entries")
            object.__setattr__(self, name, arr)
        d, h = self.w1.shape
        if self.b1.shape != (h,) or self.w2.shape != (h, h) or self.b2.shape != (h,):
            raise ShapeError("hidden-layer parameter shapes are inconsistent")
        if self.w3.shape[0] != h or self.b3.shape != (self.w3.shape[1],):
            raise ShapeError("output-layer parameter shapes are inconsistent")

    def arrays(self) -> list[np.ndarray]:
        return [getattr(self, name) for name in PARAM_FIELDS]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.w1.shape[0], self.w1.shape[1], self.w3.shape[1]


@dataclass(frozen=True)
class Grads:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    def arrays(self) -> list[np.ndarray]:
        return [getattr(self, name) for name in PARAM_FIELDS]


@dataclass
class AdamState:
    """First/second moment accumulators plus the shared hyperparameters."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: GcnParams, lr: float = 0.01, beta1: float = 0.9,
                   beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(
            m=[np.zeros_like(a) for a in params.arrays()],
            v=[np.zeros_like(a) for a in params.arrays()],
            lr=lr, beta1=beta1, beta2=beta2, eps=eps,
        )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    lr: float = 0.01
    dropout_p: float = 0.5
    hidden: int = 16
    n_classes: int = 2
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not 0 <= self.dropout_p < 1:
            raise ParameterError("dropout_p must be in [0, 1)")
        if self.epochs < 1:
            raise ParameterError("epochs must be >= 1")


@dataclass(frozen=True)
class ForwardCache:
    """Every intermediate needed to run the backward pass."""

    a_hat: object
    s1: np.ndarray
    z1: np.ndarray
    mask1: np.ndarray | None
    s2: np.ndarray
    z2: np.ndarray
    mask2: np.ndarray | None
    s3: np.ndarray
    z3: np.ndarray
    log_probs: np.ndarray
    params: GcnParams
    dropout_p: float


def init_params(d: int, h: int, c: int, seed: int) -> GcnParams:
    """Glorot-uniform weights with zero biases, deterministic per seed."""
    if min(d, h, c) < 1:
        raise ParameterError("all layer sizes must be >= 1")
    rng = np.random.default_rng(seed)

    def glorot(fan_in, fan_out):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))

    return GcnParams(
        w1=glorot(d, h), b1=np.zeros(h),
        w2=glorot(h, h), b2=np.zeros(h),
        w3=glorot(h, c), b3=np.zeros(c),
    )


def log_softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise log-softmax, stabilized by max subtraction."""
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def forward(
    a_hat,
    x: np.ndarray,
    params: GcnParams,
    dropout_p: float = 0.0,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> ForwardCache:
    """Full forward pass. Inference (training=False) is deterministic."""
    x = np.asarray(x, dtype=float)
    d, h, c = params.dims
    if x.ndim != 2 or x.shape[1] != d:
        raise ShapeError(f"node features must be (n, {d}), got {x.shape}")
    if a_hat.shape != (x.shape[0], x.shape[0]):
        raise ShapeError(
            f"propagation operator is {a_hat.shape}, features have {x.shape[0]} nodes"
        )

    drop = training and dropout_p > 0.0
    if drop and rng is None:
        raise ParameterError("training with dropout requires a random generator")

    def dropout(activations):
        if not drop:
            return activations, None
        mask = rng.random(activations.shape) >= dropout_p
        return activations * mask / (1.0 - dropout_p), mask

    s1 = a_hat @ x
    z1 = s1 @ params.w1 + params.b1
    h1, mask1 = dropout(np.maximum(z1, 0.0))
    s2 = a_hat @ h1
    z2 = s2 @ params.w2 + params.b2
    h2, mask2 = dropout(np.maximum(z2, 0.0))
    s3 = a_hat @ h2
    z3 = s3 @ params.w3 + params.b3
    return ForwardCache(
        a_hat=a_hat,
        s1=s1, z1=z1, mask1=mask1,
        s2=s2, z2=z2, mask2=mask2,
        s3=s3, z3=z3,
        log_probs=log_softmax(z3),
        params=params,
        dropout_p=dropout_p,
    )


def loss_and_grads(cache: ForwardCache, labels: np.ndarray, train_mask: np.ndarray):
    """Masked mean NLL loss and its gradients w.r.t. every parameter."""
    labels = np.asarray(labels, dtype=int)
    train_mask = np.asarray(train_mask, dtype=bool)
    n_train = int(train_mask.sum())
    if n_train == 0:
        raise EmptyMaskError("train mask selects no nodes")

    log_probs = cache.log_probs
    n, c = log_probs.shape
    loss = float(-log_probs[train_mask, labels[train_mask]].mean())

    p = cache.params
    a_hat = cache.a_hat

    # d loss / d z3 through log-softmax: (softmax - onehot) / n_train on masked rows
    dz3 = np.exp(log_probs)
    dz3[np.arange(n), labels] -= 1.0
    dz3[~train_mask] = 0.0
    dz3 /= n_train

    dw3 = cache.s3.T @ dz3
    db3 = dz3.sum(axis=0)
    dh2 = (a_hat.T @ dz3) @ p.w3.T

    if cache.mask2 is not None:
        dh2 = dh2 * cache.mask2 / (1.0 - cache.dropout_p)
    dz2 = dh2 * (cache.z2 > 0.0)
    dw2 = cache.s2.T @ dz2
    db2 = dz2.sum(axis=0)
    dh1 = (a_hat.T @ dz2) @ p.w2.T

    if cache.mask1 is not None:
        dh1 = dh1 * cache.mask1 / (1.0 - cache.dropout_p)
    dz1 = dh1 * (cache.z1 > 0.0)
    dw1 = cache.s1.T @ dz1
    db1 = dz1.sum(axis=0)

    return loss, Grads(w1=dw1, b1=db1, w2=dw2, b2=db2, w3=dw3, b3=db3)


def adam_step(params: GcnParams, state: AdamState, grads: Grads) -> tuple[GcnParams, AdamState]:
    """One bias-corrected Adam update; returns new params and advanced state."""
    t = state.t + 1
    new_values = {}
    new_m, new_v = [], []
    for name, theta, g, m, v in zip(
        PARAM_FIELDS, params.arrays(), grads.arrays(), state.m, state.v
    ):
        if not np.all(np.isfinite(g)):
            raise DivergenceError(f"non-finite gradient for {name}")
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        new_values[name] = theta - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        new_m.append(m)
        new_v.append(v)
    return GcnParams(**new_values), AdamState(
        m=new_m, v=new_v, t=t, lr=state.lr,
        beta1=state.beta1, beta2=state.beta2, eps=state.eps,
    )


@dataclass(frozen=True)
class TrainResult:
    params: GcnParams
    loss_history: tuple[float, ...]


def train(graph: FeatureGraph, a_hat, cfg: TrainConfig) -> TrainResult:
    """Full-batch training for cfg.epochs steps, deterministic per cfg.seed."""
    if graph.train_mask is None:
        raise EmptyMaskError("graph carries no train mask")
    root = np.random.SeedSequence(cfg.seed)
    init_seq, dropout_seq = root.spawn(2)
    d = graph.x.shape[1]
    params = init_params(d, cfg.hidden, cfg.n_classes, seed=init_seq)
    state = AdamState.for_params(params, lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    rng = np.random.default_rng(dropout_seq)

    history = []
    for _ in range(cfg.epochs):
        cache = forward(a_hat, graph.x, params, cfg.dropout_p, training=True, rng=rng)
        loss, grads = loss_and_grads(cache, graph.labels, graph.train_mask)
        params, state = adam_step(params, state, grads)
        history.append(loss)
    return TrainResult(params=params, loss_history=tuple(history))


def predict(a_hat, x: np.ndarray, params: GcnParams) -> np.ndarray:
    """Class labels by argmax of the inference-mode log-probabilities."""
    cache = forward(a_hat, x, params, training=False)
    return np.argmax(cache.log_probs, axis=1)


def embed(a_hat, x: np.ndarray, params: GcnParams) -> np.ndarray:
    """Second hidden layer activations (post-ReLU), dropout disabled."""
    cache = forward(a_hat, x, params, training=False)
    return np.maximum(cache.z2, 0.0)
