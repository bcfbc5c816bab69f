"""Restricted Boltzmann machine with CD1 training, greedy stack pretraining
and unrolling into autoencoder initial weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from semhash.autoencoder import ACT_LOGISTIC, NetworkParams, _logistic

# Exhaustive enumeration over 2^(n_v + n_h) configurations; test-oracle scale.
MAX_ENUMERABLE_UNITS = 20


@dataclass
class RbmParams:
    weights: np.ndarray        # (n_visible, n_hidden)
    visible_bias: np.ndarray   # (n_visible,)
    hidden_bias: np.ndarray    # (n_hidden,)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.visible_bias = np.asarray(self.visible_bias, dtype=np.float64)
        self.hidden_bias = np.asarray(self.hidden_bias, dtype=np.float64)
        if self.weights.shape != (self.visible_bias.size, self.hidden_bias.size):
            raise ValueError("weight matrix does not match bias dimensions")
        if not (
            np.all(np.isfinite(self.weights))
            and np.all(np.isfinite(self.visible_bias))
            and np.all(np.isfinite(self.hidden_bias))
        ):
            raise ValueError("non-finite RBM parameters")

    @property
    def n_visible(self) -> int:
        return self.visible_bias.size

    @property
    def n_hidden(self) -> int:
        return self.hidden_bias.size

    def copy(self) -> "RbmParams":
        return RbmParams(
            self.weights.copy(), self.visible_bias.copy(), self.hidden_bias.copy()
        )


def init_rbm(n_visible: int, n_hidden: int, seed: int, scale: float = 0.1) -> RbmParams:
    rng = np.random.default_rng(seed)
    return RbmParams(
        weights=rng.normal(0.0, scale, size=(n_visible, n_hidden)),
        visible_bias=np.zeros(n_visible),
        hidden_bias=np.zeros(n_hidden),
    )


def energy(rbm: RbmParams, v: np.ndarray, h: np.ndarray) -> float:
    """E(v,h) = -(a.v + b.h + v W h)."""
    v = np.asarray(v, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if v.shape != (rbm.n_visible,) or h.shape != (rbm.n_hidden,):
        raise ValueError("configuration shape does not match RBM")
    return float(-(rbm.visible_bias @ v + rbm.hidden_bias @ h + v @ rbm.weights @ h))


def _all_configs(n: int) -> np.ndarray:
    """All binary vectors of length n as a (2^n, n) array, bit 0 first."""
    idx = np.arange(2**n, dtype=np.uint32)
    return ((idx[:, np.newaxis] >> np.arange(n)) & 1).astype(np.float64)


def _neg_energy_table(rbm: RbmParams) -> np.ndarray:
    """-E over all configurations: (2^n_v, 2^n_h)."""
    vs = _all_configs(rbm.n_visible)
    hs = _all_configs(rbm.n_hidden)
    return (
        (vs @ rbm.visible_bias)[:, np.newaxis]
        + (hs @ rbm.hidden_bias)[np.newaxis, :]
        + vs @ rbm.weights @ hs.T
    )


def partition_function(rbm: RbmParams) -> float:
    """Z = sum over all (v,h) of e^{-E}. Only for small, enumerable RBMs."""
    if rbm.n_visible + rbm.n_hidden > MAX_ENUMERABLE_UNITS:
        raise ValueError(
            f"partition function enumerates 2^units configurations; "
            f"{rbm.n_visible + rbm.n_hidden} units exceeds the "
            f"{MAX_ENUMERABLE_UNITS}-unit cap"
        )
    return float(np.exp(_neg_energy_table(rbm)).sum())


def joint_distribution(rbm: RbmParams) -> np.ndarray:
    """p(v,h) = e^{-E}/Z as a (2^n_v, 2^n_h) table; enumeration oracle."""
    table = np.exp(_neg_energy_table(rbm))
    return table / table.sum()


def hidden_probs(rbm: RbmParams, v: np.ndarray) -> np.ndarray:
    """p(h_j = 1 | v) = sigma(b_j + sum_i v_i w_ij); v may be a batch."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != rbm.n_visible:
        raise ValueError("visible vector shape does not match RBM")
    return _logistic(v @ rbm.weights + rbm.hidden_bias)


def visible_probs(rbm: RbmParams, h: np.ndarray) -> np.ndarray:
    """p(v_i = 1 | h) = sigma(a_i + sum_j h_j w_ij); h may be a batch."""
    h = np.asarray(h, dtype=np.float64)
    if h.shape[-1] != rbm.n_hidden:
        raise ValueError("hidden vector shape does not match RBM")
    return _logistic(h @ rbm.weights.T + rbm.visible_bias)


def _sample(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    return (rng.random(probs.shape) < probs).astype(np.float64)


def cd1_step(
    rbm: RbmParams, v_batch: np.ndarray, learning_rate: float, rng: np.random.Generator
) -> RbmParams:
    """One contrastive-divergence update over a batch of visible vectors.

    Data statistics use sampled hidden states; the model-side hidden factor
    uses the probabilities recomputed on the sampled reconstruction, which
    lowers estimator variance without changing its expectation.
    """
    v = np.asarray(v_batch, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] == 0:
        raise ValueError("cd1_step needs a non-empty (batch, n_visible) array")
    if v.shape[1] != rbm.n_visible:
        raise ValueError("batch width does not match RBM visible units")
    n = v.shape[0]

    p_h = hidden_probs(rbm, v)
    h_star = _sample(rng, p_h)
    p_v = visible_probs(rbm, h_star)
    v_star = _sample(rng, p_v)
    p_h_star = hidden_probs(rbm, v_star)

    dw = (v.T @ h_star - v_star.T @ p_h_star) / n
    da = (v - v_star).mean(axis=0)
    db = (h_star - p_h_star).mean(axis=0)
    return RbmParams(
        weights=rbm.weights + learning_rate * dw,
        visible_bias=rbm.visible_bias + learning_rate * da,
        hidden_bias=rbm.hidden_bias + learning_rate * db,
    )


def reconstruction_error(rbm: RbmParams, data: np.ndarray) -> float:
    """Mean squared mean-field reconstruction error over the data."""
    data = np.asarray(data, dtype=np.float64)
    recon = visible_probs(rbm, hidden_probs(rbm, data))
    return float(((data - recon) ** 2).mean())


@dataclass
class RbmTrainConfig:
    epochs: int = 10
    batch_size: int = 64
    learning_rate: float = 0.1
    seed: int = 0
    init_scale: float = 0.1


def train_rbm(rbm: RbmParams, data: np.ndarray, cfg: RbmTrainConfig) -> RbmParams:
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("training data must be a non-empty (n, n_visible) array")
    rng = np.random.default_rng(cfg.seed)
    out = rbm.copy()
    n = data.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = data[order[start : start + cfg.batch_size]]
            out = cd1_step(out, batch, cfg.learning_rate, rng)
    return out


def pretrain_stack(
    layer_dims: list[int], data: np.ndarray, cfg: RbmTrainConfig
) -> list[RbmParams]:
    """Greedy layerwise training; each layer's training data is the previous
    layer's hidden probabilities (mean-field propagation)."""
    if len(layer_dims) < 2:
        raise ValueError("need at least visible and one hidden dimension")
    data = np.asarray(data, dtype=np.float64)
    stack: list[RbmParams] = []
    layer_input = data
    for k, (n_v, n_h) in enumerate(zip(layer_dims[:-1], layer_dims[1:])):
        rbm = init_rbm(n_v, n_h, seed=cfg.seed + k, scale=cfg.init_scale)
        rbm = train_rbm(rbm, layer_input, cfg)
        stack.append(rbm)
        layer_input = hidden_probs(rbm, layer_input)
    return stack


def unroll(stack: list[RbmParams]) -> NetworkParams:
    """Mirror a trained stack into an all-logistic autoencoder: encoder layers
    take each RBM's weights and hidden biases, decoder layers the transposed
    weights and visible biases in reverse order."""
    if not stack:
        raise ValueError("cannot unroll an empty stack")
    weights = [r.weights.copy() for r in stack]
    biases = [r.hidden_bias.copy() for r in stack]
    for r in reversed(stack):
        weights.append(r.weights.T.copy())
        biases.append(r.visible_bias.copy())
    return NetworkParams(weights, biases, [ACT_LOGISTIC] * len(weights))
