"""Minimal feed-forward network engine on float64 numpy.

Provides parameter containers, forward evaluation, exact reverse-mode
gradients (including gradients with respect to the input, needed for
deterministic policy gradients through a critic), Adam updates, Polyak
target tracking, and weight counting. Networks are small by design: at
most two hidden layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HIDDEN_ACTIVATIONS = ("relu", "tanh")
OUTPUT_ACTIVATIONS = ("linear", "tanh", "tanh_scaled")


@dataclass(frozen=True)
class MlpSpec:
    """Architecture of one fully-connected network.

    ``hidden`` may be empty, in which case the network is a single
    linear layer. ``output_bound`` is only used by ``tanh_scaled``.
    """

    in_dim: int
    hidden: tuple[int, ...] = ()
    out_dim: int = 1
    hidden_activation: str = "relu"
    output_activation: str = "linear"
    output_bound: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError(f"dimensions must be >= 1, got in={self.in_dim} out={self.out_dim}")
        if any(h < 1 for h in self.hidden):
            raise ValueError(f"hidden sizes must be >= 1, got {self.hidden}")
        if len(self.hidden) > 2:
            raise ValueError(f"at most 2 hidden layers supported, got {len(self.hidden)}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"unknown hidden_activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output_activation {self.output_activation!r}")
        if self.output_activation == "tanh_scaled" and not self.output_bound > 0:
            raise ValueError("tanh_scaled requires output_bound > 0")

    @property
    def layer_dims(self) -> list[int]:
        return [self.in_dim, *self.hidden, self.out_dim]


@dataclass
class MlpParams:
    """Weights and biases for one network; layer k maps dims[k] -> dims[k+1].

    Weight matrices are stored (out x in); biases are vectors of length out.
    """

    spec: MlpSpec
    layers: list[tuple[np.ndarray, np.ndarray]]

    def copy(self) -> "MlpParams":
        return MlpParams(self.spec, [(w.copy(), b.copy()) for w, b in self.layers])

    def zeros_like(self) -> "MlpParams":
        return MlpParams(self.spec, [(np.zeros_like(w), np.zeros_like(b)) for w, b in self.layers])

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(w)) and np.all(np.isfinite(b)) for w, b in self.layers)

    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in self.layers)


@dataclass
class AdamState:
    """Adam moments mirroring one MlpParams, plus hyperparameters."""

    step_count: int
    m: list[tuple[np.ndarray, np.ndarray]]
    v: list[tuple[np.ndarray, np.ndarray]]
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: MlpParams, lr: float, beta1: float = 0.9,
                   beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        if not lr > 0:
            raise ValueError("lr must be > 0")
        zeros = lambda: [(np.zeros_like(w), np.zeros_like(b)) for w, b in params.layers]
        return cls(step_count=0, m=zeros(), v=zeros(), lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def init_mlp(spec: MlpSpec, rng_seed: int) -> MlpParams:
    """Initialize weights uniform in +/- sqrt(1/fan_in); biases zero.

    Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(rng_seed)
    dims = spec.layer_dims
    layers = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(1.0 / fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = np.zeros(fan_out)
        layers.append((w, b))
    return MlpParams(spec, layers)


def _hidden_act(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _output_act(z: np.ndarray, spec: MlpSpec) -> np.ndarray:
    if spec.output_activation == "linear":
        return z
    if spec.output_activation == "tanh":
        return np.tanh(z)
    return spec.output_bound * np.tanh(z)


def _check_input(params: MlpParams, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.spec.in_dim:
        raise ValueError(f"input dim {x.shape[-1]} != spec.in_dim {params.spec.in_dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input")
    return x


def forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Evaluate the network. Accepts a single input vector or a batch (B, in_dim)."""
    x = _check_input(params, x)
    h = x
    n = len(params.layers)
    for k, (w, b) in enumerate(params.layers):
        z = h @ w.T + b
        h = _output_act(z, params.spec) if k == n - 1 else _hidden_act(z, params.spec.hidden_activation)
    return h


def _forward_trace(params: MlpParams, x: np.ndarray):
    """Forward pass keeping per-layer inputs and pre-activations for backward."""
    inputs = []
    pre = []
    h = x
    n = len(params.layers)
    for k, (w, b) in enumerate(params.layers):
        inputs.append(h)
        z = h @ w.T + b
        pre.append(z)
        h = _output_act(z, params.spec) if k == n - 1 else _hidden_act(z, params.spec.hidden_activation)
    return h, inputs, pre


def backward(params: MlpParams, x: np.ndarray, output_grad: np.ndarray):
    """Exact gradients of sum(output * output_grad) w.r.t. parameters and input.

    Accepts single vectors or batches; batch contributions are summed into
    the parameter gradients while ``input_grad`` keeps the input's shape.
    Returns ``(param_grads, input_grad)`` where ``param_grads`` mirrors the
    MlpParams layout.
    """
    x = _check_input(params, x)
    g = np.asarray(output_grad, dtype=np.float64)
    if g.shape[-1] != params.spec.out_dim:
        raise ValueError(f"output_grad dim {g.shape[-1]} != spec.out_dim {params.spec.out_dim}")
    single = x.ndim == 1
    xb = x[None, :] if single else x
    gb = g[None, :] if single else g
    if gb.shape[0] != xb.shape[0]:
        raise ValueError("output_grad batch size does not match input")

    _, inputs, pre = _forward_trace(params, xb)
    spec = params.spec
    n = len(params.layers)
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * n  # type: ignore[list-item]
    d = gb
    for k in range(n - 1, -1, -1):
        z = pre[k]
        if k == n - 1:
            if spec.output_activation == "tanh":
                d = d * (1.0 - np.tanh(z) ** 2)
            elif spec.output_activation == "tanh_scaled":
                d = d * spec.output_bound * (1.0 - np.tanh(z) ** 2)
        else:
            if spec.hidden_activation == "relu":
                d = d * (z > 0.0)
            else:
                d = d * (1.0 - np.tanh(z) ** 2)
        w, _ = params.layers[k]
        grads[k] = (d.T @ inputs[k], d.sum(axis=0))
        d = d @ w
    input_grad = d[0] if single else d
    return MlpParams(spec, grads), input_grad


def adam_step(params: MlpParams, grads: MlpParams, state: AdamState):
    """One Adam update with bias correction. Mutates params and state in place."""
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for (w, b), (gw, gb), (mw, mb), (vw, vb) in zip(params.layers, grads.layers, state.m, state.v):
        for p, g, m, v in ((w, gw, mw, vw), (b, gb, mb, vb)):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


def soft_update(target: MlpParams, online: MlpParams, tau: float) -> MlpParams:
    """Polyak tracking: target <- tau * online + (1 - tau) * target, in place."""
    if target.spec != online.spec:
        raise ValueError("soft_update requires identical specs")
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must be in [0, 1]")
    for (tw, tb), (ow, ob) in zip(target.layers, online.layers):
        tw *= 1.0 - tau
        tw += tau * ow
        tb *= 1.0 - tau
        tb += tau * ob
    return target


def param_count(in_dim: int, hidden, out_dim: int) -> int:
    """Weights plus biases of the fully-connected net in_dim -> hidden -> out_dim."""
    dims = [int(in_dim), *(int(h) for h in hidden), int(out_dim)]
    if any(d < 1 for d in dims):
        raise ValueError(f"dimensions must be >= 1, got {dims}")
    return sum(fi * fo + fo for fi, fo in zip(dims[:-1], dims[1:]))
