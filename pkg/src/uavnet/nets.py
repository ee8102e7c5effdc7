"""Minimal dense networks with explicit forward, backward, and Adam updates.

Everything is float64 numpy: at the problem sizes used here precision is
cheaper than chasing drift, and the whole stack stays debuggable with a
finite-difference check.  Networks are plain parameter containers; forward
returns the cache backward needs, so composite architectures (hypernetworks,
mixing layers) can be differentiated by hand-chaining these calls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DenseNet",
    "ForwardCache",
    "Gradients",
    "AdamState",
    "init_net",
    "forward",
    "backward",
    "grad_check",
    "init_adam",
    "adam_step",
    "net_to_dict",
    "net_from_dict",
    "save_net",
    "load_net",
]

_ACTIVATIONS = ("relu", "linear")


@dataclass
class DenseNet:
    """Fully connected layers; ``weights[i]`` has shape (fan_in, fan_out)."""

    dims: tuple[int, ...]
    activations: tuple[str, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def in_dim(self) -> int:
        return self.dims[0]

    @property
    def out_dim(self) -> int:
        return self.dims[-1]

    def clone(self) -> "DenseNet":
        return DenseNet(
            dims=self.dims,
            activations=self.activations,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )

    def copy_from(self, other: "DenseNet") -> None:
        for mine, theirs in zip(self.weights, other.weights):
            mine[...] = theirs
        for mine, theirs in zip(self.biases, other.biases):
            mine[...] = theirs


@dataclass
class ForwardCache:
    """Values backward needs: layer inputs, pre-activations, input shape."""

    inputs: list[np.ndarray]
    preacts: list[np.ndarray]
    squeeze: bool


@dataclass
class Gradients:
    """Parameter gradients, shape-congruent with a DenseNet."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]


def init_net(
    dims: "tuple[int, ...] | list[int]",
    activations: "tuple[str, ...] | list[str] | None" = None,
    seed: "int | np.random.SeedSequence" = 0,
) -> DenseNet:
    """Uniform initialization with bound sqrt(6 / (fan_in + fan_out)), zero biases.

    Default activations are rectified-linear on hidden layers and identity on
    the output layer.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise ValueError("need at least an input and an output dimension")
    if any(d < 1 for d in dims):
        raise ValueError("layer dimensions must be >= 1")
    n_layers = len(dims) - 1
    if activations is None:
        activations = ("relu",) * (n_layers - 1) + ("linear",)
    activations = tuple(activations)
    if len(activations) != n_layers:
        raise ValueError(f"need {n_layers} activations, got {len(activations)}")
    for a in activations:
        if a not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {a!r}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return DenseNet(dims=dims, activations=activations, weights=weights, biases=biases)


def forward(net: DenseNet, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Evaluate the network on a vector or a (batch, in_dim) matrix."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    h = x.reshape(1, -1) if squeeze else x
    if h.shape[1] != net.in_dim:
        raise ValueError(f"input dim {h.shape[1]} != {net.in_dim}")
    inputs, preacts = [], []
    for w, b, act in zip(net.weights, net.biases, net.activations):
        inputs.append(h)
        z = h @ w + b
        preacts.append(z)
        h = np.maximum(z, 0.0) if act == "relu" else z
    y = h[0] if squeeze else h
    return y, ForwardCache(inputs=inputs, preacts=preacts, squeeze=squeeze)


def backward(net: DenseNet, cache: ForwardCache, upstream: np.ndarray) -> tuple[Gradients, np.ndarray]:
    """Exact gradients of ``sum(y * upstream)`` w.r.t. parameters and input.

    ``upstream`` must match the forward output's shape; batched inputs sum
    parameter gradients over the batch.  Returns (parameter gradients,
    gradient w.r.t. the input).
    """
    g = np.asarray(upstream, dtype=np.float64)
    g = g.reshape(1, -1) if cache.squeeze else g
    if g.shape != cache.preacts[-1].shape:
        raise ValueError(f"upstream shape {g.shape} != output shape {cache.preacts[-1].shape}")
    d_weights: list[np.ndarray] = [np.empty(0)] * len(net.weights)
    d_biases: list[np.ndarray] = [np.empty(0)] * len(net.biases)
    for i in reversed(range(len(net.weights))):
        if net.activations[i] == "relu":
            g = g * (cache.preacts[i] > 0)
        d_weights[i] = cache.inputs[i].T @ g
        d_biases[i] = g.sum(axis=0)
        g = g @ net.weights[i].T
    dx = g[0] if cache.squeeze else g
    return Gradients(weights=d_weights, biases=d_biases), dx


def grad_check(net: DenseNet, x: np.ndarray, tol: float = 1e-4, seed: int = 0) -> float:
    """Max relative error of backward vs central finite differences.

    Uses a fixed random linear readout of the output so vector-valued
    networks reduce to one scalar; the step is 1e-5.  Passing means the
    returned error is below ``tol``.
    """
    rng = np.random.default_rng(seed)
    y, cache = forward(net, x)
    upstream = rng.normal(size=y.shape)
    analytic, _ = backward(net, cache, upstream)
    step = 1e-5
    worst = 0.0

    def loss() -> float:
        return float(np.sum(forward(net, x)[0] * upstream))

    for params, grads in ((net.weights, analytic.weights), (net.biases, analytic.biases)):
        for arr, grad in zip(params, grads):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for idx in range(flat.size):
                keep = flat[idx]
                flat[idx] = keep + step
                up = loss()
                flat[idx] = keep - step
                down = loss()
                flat[idx] = keep
                numeric = (up - down) / (2 * step)
                err = abs(numeric - gflat[idx]) / max(1e-8, abs(numeric) + abs(gflat[idx]))
                worst = max(worst, err)
    return worst


@dataclass
class AdamState:
    """Adaptive-moment optimizer state for one DenseNet."""

    m_weights: list[np.ndarray]
    v_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_biases: list[np.ndarray]
    step: int
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(net: DenseNet, lr: float) -> AdamState:
    return AdamState(
        m_weights=[np.zeros_like(w) for w in net.weights],
        v_weights=[np.zeros_like(w) for w in net.weights],
        m_biases=[np.zeros_like(b) for b in net.biases],
        v_biases=[np.zeros_like(b) for b in net.biases],
        step=0,
        lr=lr,
    )


def adam_step(net: DenseNet, grads: Gradients, state: AdamState) -> None:
    """One bias-corrected adaptive-moment update, in place."""
    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for params, gs, ms, vs in (
        (net.weights, grads.weights, state.m_weights, state.v_weights),
        (net.biases, grads.biases, state.m_biases, state.v_biases),
    ):
        for p, g, m, v in zip(params, gs, ms, vs):
            if p.shape != g.shape:
                raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
            m[...] = state.beta1 * m + (1.0 - state.beta1) * g
            v[...] = state.beta2 * v + (1.0 - state.beta2) * g * g
            m_hat = m / correction1
            v_hat = v / correction2
            p -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def net_to_dict(net: DenseNet) -> dict:
    return {
        "dims": list(net.dims),
        "activations": list(net.activations),
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }


def net_from_dict(doc: dict) -> DenseNet:
    net = DenseNet(
        dims=tuple(doc["dims"]),
        activations=tuple(doc["activations"]),
        weights=[np.asarray(w, dtype=np.float64) for w in doc["weights"]],
        biases=[np.asarray(b, dtype=np.float64) for b in doc["biases"]],
    )
    for w, fan_in, fan_out in zip(net.weights, net.dims[:-1], net.dims[1:]):
        if w.shape != (fan_in, fan_out):
            raise ValueError(f"weight shape {w.shape} inconsistent with dims {net.dims}")
    return net


CHECKPOINT_FORMAT = "uavnet-densenet"
CHECKPOINT_VERSION = 1


def save_net(net: DenseNet, path: "str | Path") -> Path:
    """Write a network as a versioned JSON checkpoint (exact float round-trip)."""
    path = Path(path)
    doc = {"format": CHECKPOINT_FORMAT, "version": CHECKPOINT_VERSION, **net_to_dict(net)}
    path.write_text(json.dumps(doc) + "\n")
    return path


def load_net(path: "str | Path") -> DenseNet:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != CHECKPOINT_FORMAT or doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: not a {CHECKPOINT_FORMAT} v{CHECKPOINT_VERSION} checkpoint")
    return net_from_dict(doc)
