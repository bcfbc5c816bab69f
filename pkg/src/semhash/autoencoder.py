"""Dense feedforward denoising autoencoder trained by backpropagation with
an adadelta-style per-parameter step rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ACT_RECTIFIER = "rectifier"
ACT_LOGISTIC = "logistic"

LOSS_BCE = "bce"
LOSS_SQUARED = "squared"

_BCE_CLIP = 1e-12


def _logistic(a):
    # Split by sign so exp never overflows.
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ea = np.exp(a[~pos])
    out[~pos] = ea / (1.0 + ea)
    return out


def _activate(kind: str, a: np.ndarray) -> np.ndarray:
    if kind == ACT_RECTIFIER:
        return np.maximum(a, 0.0)
    if kind == ACT_LOGISTIC:
        return _logistic(a)
    raise ValueError(f"unknown activation kind {kind!r}")


def _activation_grad(kind: str, a: np.ndarray, z: np.ndarray) -> np.ndarray:
    """g'(a), using the post-activation z where that is cheaper."""
    if kind == ACT_RECTIFIER:
        # Derivative at exactly 0 is defined as 0.
        return (a > 0).astype(np.float64)
    if kind == ACT_LOGISTIC:
        return z * (1.0 - z)
    raise ValueError(f"unknown activation kind {kind!r}")


def default_activations(dims: list[int]) -> list[str]:
    """Logistic at the bottleneck and output layers, rectifier elsewhere."""
    n_layers = len(dims) - 1
    bottleneck = len(dims) // 2 - 1
    acts = [ACT_RECTIFIER] * n_layers
    acts[bottleneck] = ACT_LOGISTIC
    acts[n_layers - 1] = ACT_LOGISTIC
    return acts


@dataclass
class NetworkParams:
    """Per-layer weights (fan_in x fan_out), biases and activation kinds."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: list[str]

    def __post_init__(self):
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ValueError("per-layer lists must have equal length")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape[1] != b.shape[0]:
                raise ValueError(f"layer {k}: bias does not match weight fan-out")
            if k and self.weights[k - 1].shape[1] != w.shape[0]:
                raise ValueError(f"layer {k}: fan-in does not match previous fan-out")

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def bottleneck_layer(self) -> int:
        """Index of the layer whose output is the code."""
        return len(self.dims) // 2 - 1

    @property
    def code_bits(self) -> int:
        return self.dims[self.bottleneck_layer + 1]

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            list(self.activations),
        )


def init_network(
    dims: list[int], seed: int, activations: list[str] | None = None
) -> NetworkParams:
    """Zero-mean normal weights with std 1/sqrt(fan_in); zero biases."""
    if len(dims) < 3:
        raise ValueError("need at least input, bottleneck and output dimensions")
    if any(d < 1 for d in dims):
        raise ValueError("all layer dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    weights = [
        rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_in, fan_out))
        for fan_in, fan_out in zip(dims[:-1], dims[1:])
    ]
    biases = [np.zeros(fan_out, dtype=np.float64) for fan_out in dims[1:]]
    return NetworkParams(weights, biases, activations or default_activations(dims))


@dataclass
class Activations:
    """Forward-pass record: layer inputs z^0..z^L and pre-activations a^1..a^L.

    z^0 is the network input, z^L the reconstruction. Arrays are 2-D
    (batch, units) even for a single input.
    """

    layer_inputs: list[np.ndarray]
    pre_activations: list[np.ndarray]

    @property
    def reconstruction(self) -> np.ndarray:
        return self.layer_inputs[-1]


def _as_batch(x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[np.newaxis, :], True
    return x, False


def forward(net: NetworkParams, x: np.ndarray) -> Activations:
    """Run the full network; x may be one vector or a (batch, dim) matrix."""
    xb, _ = _as_batch(x)
    if xb.shape[1] != net.dims[0]:
        raise ValueError(f"input has {xb.shape[1]} features, network expects {net.dims[0]}")
    if not np.all(np.isfinite(xb)):
        raise ValueError("non-finite network input")
    zs = [xb]
    pre = []
    z = xb
    for w, b, kind in zip(net.weights, net.biases, net.activations):
        a = z @ w + b
        z = _activate(kind, a)
        pre.append(a)
        zs.append(z)
    return Activations(layer_inputs=zs, pre_activations=pre)


def encode(net: NetworkParams, x: np.ndarray) -> np.ndarray:
    """Bottleneck activation vector (code probabilities)."""
    xb, single = _as_batch(x)
    if xb.shape[1] != net.dims[0]:
        raise ValueError(f"input has {xb.shape[1]} features, network expects {net.dims[0]}")
    if not np.all(np.isfinite(xb)):
        raise ValueError("non-finite network input")
    z = xb
    for k in range(net.bottleneck_layer + 1):
        z = _activate(net.activations[k], z @ net.weights[k] + net.biases[k])
    return z[0] if single else z


def reconstruct(net: NetworkParams, x: np.ndarray) -> np.ndarray:
    xb, single = _as_batch(x)
    r = forward(net, xb).reconstruction
    return r[0] if single else r


def loss_value(recon: np.ndarray, target: np.ndarray, loss: str = LOSS_BCE) -> float:
    """Mean per-example loss; per example the loss sums over features."""
    recon, _ = _as_batch(recon)
    target, _ = _as_batch(target)
    if recon.shape != target.shape:
        raise ValueError("reconstruction and target shapes differ")
    if loss == LOSS_BCE:
        if np.any(target < 0) or np.any(target > 1):
            raise ValueError("binary cross-entropy requires targets in [0,1]")
        r = np.clip(recon, _BCE_CLIP, 1.0 - _BCE_CLIP)
        per = -(target * np.log(r) + (1.0 - target) * np.log(1.0 - r)).sum(axis=1)
    elif loss == LOSS_SQUARED:
        per = 0.5 * ((target - recon) ** 2).sum(axis=1)
    else:
        raise ValueError(f"unknown loss {loss!r}")
    return float(per.mean())


@dataclass
class Gradients:
    """Shape-congruent with the network; deltas are per-layer error terms."""

    weight_grads: list[np.ndarray]
    bias_grads: list[np.ndarray]
    deltas: list[np.ndarray]


def backward(
    net: NetworkParams, acts: Activations, target: np.ndarray, loss: str = LOSS_BCE
) -> Gradients:
    """Backpropagate the reconstruction error; gradients are batch means."""
    target, _ = _as_batch(target)
    recon = acts.reconstruction
    if recon.shape != target.shape:
        raise ValueError("target shape does not match reconstruction")
    batch = recon.shape[0]

    out = net.n_layers - 1
    if loss == LOSS_BCE:
        if np.any(target < 0) or np.any(target > 1):
            raise ValueError("binary cross-entropy requires targets in [0,1]")
        if net.activations[out] != ACT_LOGISTIC:
            raise ValueError("binary cross-entropy assumes a logistic output layer")
        delta = recon - target
    elif loss == LOSS_SQUARED:
        grad_out = _activation_grad(
            net.activations[out], acts.pre_activations[out], recon
        )
        delta = (recon - target) * grad_out
    else:
        raise ValueError(f"unknown loss {loss!r}")

    weight_grads, bias_grads, deltas = [], [], []
    for k in range(out, -1, -1):
        deltas.append(delta)
        weight_grads.append(acts.layer_inputs[k].T @ delta / batch)
        bias_grads.append(delta.mean(axis=0))
        if k:
            grad_k = _activation_grad(
                net.activations[k - 1],
                acts.pre_activations[k - 1],
                acts.layer_inputs[k],
            )
            delta = (delta @ net.weights[k].T) * grad_k
    weight_grads.reverse()
    bias_grads.reverse()
    deltas.reverse()
    return Gradients(weight_grads, bias_grads, deltas)


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 256
    noise_sigma: float = 2.0
    seed: int = 0
    loss: str = LOSS_BCE
    rho: float = 0.95
    eps: float = 1e-6
    learning_rate: float = 1.0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


class _Adadelta:
    """Decayed accumulators of squared gradients and squared updates."""

    def __init__(self, arrays, rho, eps, lr):
        self.rho, self.eps, self.lr = rho, eps, lr
        self.sq_grad = [np.zeros_like(a) for a in arrays]
        self.sq_delta = [np.zeros_like(a) for a in arrays]

    def step(self, arrays, grads):
        for a, g, sg, sd in zip(arrays, grads, self.sq_grad, self.sq_delta):
            sg *= self.rho
            sg += (1.0 - self.rho) * g * g
            delta = g * np.sqrt((sd + self.eps) / (sg + self.eps))
            a -= self.lr * delta
            sd *= self.rho
            sd += (1.0 - self.rho) * delta * delta


def train(
    net: NetworkParams, data: np.ndarray | list, cfg: TrainConfig
) -> tuple[NetworkParams, list[float]]:
    """Denoising training: corrupt each batch with clipped gaussian noise and
    reconstruct the clean input. Returns the trained copy of the network and
    the mean per-epoch loss trace. Deterministic for a fixed seed.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("training data must be a non-empty (n, dim) array")
    if data.shape[1] != net.dims[0]:
        raise ValueError("training data dimensionality does not match network input")

    out = net.copy()
    if cfg.epochs == 0:
        return out, []

    rng = np.random.default_rng(cfg.seed)
    params = out.weights + out.biases
    opt = _Adadelta(params, cfg.rho, cfg.eps, cfg.learning_rate)
    n = data.shape[0]
    trace: list[float] = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = data[order[start : start + cfg.batch_size]]
            if cfg.noise_sigma > 0:
                noisy = batch + rng.normal(0.0, cfg.noise_sigma, size=batch.shape)
                np.clip(noisy, 0.0, 1.0, out=noisy)
            else:
                noisy = batch
            acts = forward(out, noisy)
            epoch_loss += loss_value(acts.reconstruction, batch, cfg.loss) * batch.shape[0]
            grads = backward(out, acts, batch, cfg.loss)
            opt.step(params, grads.weight_grads + grads.bias_grads)
        trace.append(epoch_loss / n)
    return out, trace
