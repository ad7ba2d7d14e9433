import logging
from abc import ABC, abstractmethod
from typing import Dict, Tuple, Type, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit, softmax

from ddos_analysis.exceptions import ConfigurationError, ShapeError

logger = logging.getLogger(__name__)

Shape = Tuple[int, ...]

ACTIVATIONS = ("linear", "relu", "sigmoid", "tanh")


def activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return expit(z)
    if name == "tanh":
        return np.tanh(z)
    return z


def activation_derivative(name: str, z: np.ndarray, a: np.ndarray) -> Union[np.ndarray, float]:
    """
    ``da/dz`` from the pre-activation ``z`` and the activation ``a``.
    """
    if name == "relu":
        return (z > 0).astype(np.float64)
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "tanh":
        return 1.0 - a**2
    return 1.0


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape: Shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer(ABC):
    """
    Abstract base class for layers of the numpy engine.

    A layer is built once for an input shape (without the batch axis), then
    alternates ``forward`` and ``backward`` calls. ``backward`` consumes the
    cache of the latest ``forward`` and fills ``grads`` with one array per
    entry of ``params``.

    Attributes:
        params (Dict[str, np.ndarray]): trainable tensors.
        grads (Dict[str, np.ndarray]): gradients of the latest backward pass.
        regularized (Tuple[str, ...]): parameters under the L2 penalty.
        trainable (bool): frozen layers run in inference mode and are not updated.
    """

    kind: str = ""

    def __init__(self) -> None:
        self.params: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}
        self.regularized: Tuple[str, ...] = ()
        self.trainable = True
        self.input_shape: Union[Shape, None] = None
        self.output_shape: Union[Shape, None] = None

    def build(self, input_shape: Shape, rng: np.random.Generator) -> Shape:
        self.input_shape = tuple(input_shape)
        self.output_shape = self._build(self.input_shape, rng)
        self.grads = {name: np.zeros_like(value) for name, value in self.params.items()}
        return self.output_shape

    def _build(self, input_shape: Shape, rng: np.random.Generator) -> Shape:
        return input_shape

    @abstractmethod
    def forward(self, x: np.ndarray, training: bool = False, rng: Union[np.random.Generator, None] = None) -> np.ndarray:
        pass

    @abstractmethod
    def backward(self, dy: np.ndarray) -> np.ndarray:
        pass

    def config(self) -> dict:
        return {}

    def state(self) -> Dict[str, np.ndarray]:
        """
        Non-trainable tensors that belong in a checkpoint.
        """
        return {}

    def parameter_count(self) -> int:
        return int(sum(value.size for value in self.params.values()))


class Flatten(Layer):
    kind = "flatten"

    def _build(self, input_shape, rng):
        return (int(np.prod(input_shape)),)

    def forward(self, x, training=False, rng=None):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._shape)


class Reshape(Layer):
    kind = "reshape"

    def __init__(self, target_shape: Shape) -> None:
        super().__init__()
        self.target_shape = tuple(int(size) for size in target_shape)

    def _build(self, input_shape, rng):
        if int(np.prod(input_shape)) != int(np.prod(self.target_shape)):
            raise ShapeError(f"Cannot reshape {input_shape} into {self.target_shape}")
        return self.target_shape

    def forward(self, x, training=False, rng=None):
        return x.reshape((x.shape[0],) + self.target_shape)

    def backward(self, dy):
        return dy.reshape((dy.shape[0],) + self.input_shape)

    def config(self):
        return {"target_shape": list(self.target_shape)}


class Dense(Layer):
    """
    Fully connected layer ``a = act(x W + b)`` on ``(batch, features)`` inputs.

    Args:
        units (int): output width.
        activation (str): one of ``linear``, ``relu``, ``sigmoid``, ``tanh``.
        zero_kernel (bool): start from a zero kernel, so the initial output only depends on the bias.
        l2 (bool): put the kernel under the L2 penalty.
    """

    kind = "dense"

    def __init__(self, units: int, activation: str = "linear", zero_kernel: bool = False, l2: bool = False) -> None:
        super().__init__()
        if activation not in ACTIVATIONS:
            raise ConfigurationError(f"Unknown activation {activation!r}")
        self.units = int(units)
        self.activation = activation
        self.zero_kernel = bool(zero_kernel)
        self.l2 = bool(l2)
        self.regularized = ("kernel",) if l2 else ()

    def _build(self, input_shape, rng):
        if len(input_shape) != 1:
            raise ShapeError(f"Dense layer expects flat inputs, got {input_shape}")
        fan_in = input_shape[0]
        shape = (fan_in, self.units)
        self.params["kernel"] = np.zeros(shape) if self.zero_kernel else glorot_uniform(rng, fan_in, self.units, shape)
        self.params["bias"] = np.zeros(self.units)
        return (self.units,)

    def forward(self, x, training=False, rng=None):
        self._x = x
        self._z = x @ self.params["kernel"] + self.params["bias"]
        self._a = activate(self.activation, self._z)
        return self._a

    def backward(self, dy):
        dz = dy * activation_derivative(self.activation, self._z, self._a)
        self.grads["kernel"] = self._x.T @ dz
        self.grads["bias"] = dz.sum(axis=0)
        return dz @ self.params["kernel"].T

    def config(self):
        return {"units": self.units, "activation": self.activation, "zero_kernel": self.zero_kernel, "l2": self.l2}


class Dropout(Layer):
    """
    Inverted dropout; the mask drawn in ``forward`` is reused by ``backward``.
    """

    kind = "dropout"

    def __init__(self, rate: float) -> None:
        super().__init__()
        if not 0 <= rate < 1:
            raise ConfigurationError(f"Dropout rate must lie in [0, 1), not {rate}")
        self.rate = float(rate)

    def forward(self, x, training=False, rng=None):
        if not training or self.rate == 0:
            self._mask = None
            return x
        if rng is None:
            raise ConfigurationError("Dropout in training mode needs a random generator")
        self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, dy):
        return dy if self._mask is None else dy * self._mask

    def config(self):
        return {"rate": self.rate}


class Conv1D(Layer):
    """
    Valid 1-D convolution over ``(time, features)`` inputs.
    """

    kind = "conv1d"

    def __init__(self, filters: int, kernel_size: int, activation: str = "relu", l2: bool = False) -> None:
        super().__init__()
        self.filters = int(filters)
        self.kernel_size = int(kernel_size)
        self.activation = activation
        self.l2 = bool(l2)
        self.regularized = ("kernel",) if l2 else ()

    def _build(self, input_shape, rng):
        if len(input_shape) != 2:
            raise ShapeError(f"Conv1D expects (time, features) inputs, got {input_shape}")
        length, features = input_shape
        if length < self.kernel_size:
            raise ShapeError(f"Kernel size {self.kernel_size} exceeds the sequence length {length}")
        shape = (self.kernel_size, features, self.filters)
        self.params["kernel"] = glorot_uniform(rng, self.kernel_size * features, self.kernel_size * self.filters, shape)
        self.params["bias"] = np.zeros(self.filters)
        return (length - self.kernel_size + 1, self.filters)

    def forward(self, x, training=False, rng=None):
        # (batch, steps, features, kernel)
        self._windows = sliding_window_view(x, self.kernel_size, axis=1)
        self._x_shape = x.shape
        self._z = np.einsum("btfk,kfo->bto", self._windows, self.params["kernel"]) + self.params["bias"]
        self._a = activate(self.activation, self._z)
        return self._a

    def backward(self, dy):
        dz = dy * activation_derivative(self.activation, self._z, self._a)
        self.grads["kernel"] = np.einsum("btfk,bto->kfo", self._windows, dz)
        self.grads["bias"] = dz.sum(axis=(0, 1))
        dx = np.zeros(self._x_shape)
        steps = dz.shape[1]
        for i in range(self.kernel_size):
            dx[:, i : i + steps, :] += dz @ self.params["kernel"][i].T
        return dx

    def config(self):
        return {"filters": self.filters, "kernel_size": self.kernel_size, "activation": self.activation, "l2": self.l2}


class MaxPool1D(Layer):
    """
    Non-overlapping max pooling over time; a trailing remainder is dropped.
    """

    kind = "maxpool1d"

    def __init__(self, pool_size: int = 2) -> None:
        super().__init__()
        self.pool_size = int(pool_size)

    def _build(self, input_shape, rng):
        length, channels = input_shape
        if length // self.pool_size < 1:
            raise ShapeError(f"Pool size {self.pool_size} exceeds the sequence length {length}")
        return (length // self.pool_size, channels)

    def forward(self, x, training=False, rng=None):
        batch, length, channels = x.shape
        steps = length // self.pool_size
        pools = x[:, : steps * self.pool_size].reshape(batch, steps, self.pool_size, channels)
        self._x_shape = x.shape
        self._index = pools.argmax(axis=2)
        return np.take_along_axis(pools, self._index[:, :, None, :], axis=2)[:, :, 0, :]

    def backward(self, dy):
        batch, length, channels = self._x_shape
        steps = dy.shape[1]
        pools = np.zeros((batch, steps, self.pool_size, channels))
        np.put_along_axis(pools, self._index[:, :, None, :], dy[:, :, None, :], axis=2)
        dx = np.zeros(self._x_shape)
        dx[:, : steps * self.pool_size] = pools.reshape(batch, steps * self.pool_size, channels)
        return dx

    def config(self):
        return {"pool_size": self.pool_size}


class LSTM(Layer):
    """
    LSTM over ``(time, features)`` inputs returning the final hidden state.

    Gates are laid out as input, forget, cell, output along the last axis of
    ``kernel``, ``recurrent`` and ``bias``. The forget bias starts at 1.
    """

    kind = "lstm"

    def __init__(self, units: int, l2: bool = False) -> None:
        super().__init__()
        self.units = int(units)
        self.l2 = bool(l2)
        self.regularized = ("kernel", "recurrent") if l2 else ()

    def _build(self, input_shape, rng):
        if len(input_shape) != 2:
            raise ShapeError(f"LSTM expects (time, features) inputs, got {input_shape}")
        features, units = input_shape[1], self.units
        self.params["kernel"] = glorot_uniform(rng, features, 4 * units, (features, 4 * units))
        self.params["recurrent"] = glorot_uniform(rng, units, 4 * units, (units, 4 * units))
        bias = np.zeros(4 * units)
        bias[units : 2 * units] = 1.0
        self.params["bias"] = bias
        return (units,)

    def forward(self, x, training=False, rng=None):
        batch, steps, _ = x.shape
        units = self.units
        h = np.zeros((batch, units))
        c = np.zeros((batch, units))
        self._x = x
        self._cache = []
        for t in range(steps):
            z = x[:, t] @ self.params["kernel"] + h @ self.params["recurrent"] + self.params["bias"]
            i = expit(z[:, :units])
            f = expit(z[:, units : 2 * units])
            g = np.tanh(z[:, 2 * units : 3 * units])
            o = expit(z[:, 3 * units :])
            c_next = f * c + i * g
            tanh_c = np.tanh(c_next)
            self._cache.append((h, c, i, f, g, o, tanh_c))
            h, c = o * tanh_c, c_next
        return h

    def backward(self, dy):
        kernel, recurrent = self.params["kernel"], self.params["recurrent"]
        d_kernel = np.zeros_like(kernel)
        d_recurrent = np.zeros_like(recurrent)
        d_bias = np.zeros_like(self.params["bias"])
        dx = np.zeros_like(self._x)
        dh = dy
        dc = np.zeros_like(dy)
        for t in reversed(range(self._x.shape[1])):
            h_prev, c_prev, i, f, g, o, tanh_c = self._cache[t]
            d_o = dh * tanh_c
            dc = dc + dh * o * (1.0 - tanh_c**2)
            d_i = dc * g
            d_g = dc * i
            d_f = dc * c_prev
            dz = np.concatenate([d_i * i * (1 - i), d_f * f * (1 - f), d_g * (1 - g**2), d_o * o * (1 - o)], axis=1)
            d_kernel += self._x[:, t].T @ dz
            d_recurrent += h_prev.T @ dz
            d_bias += dz.sum(axis=0)
            dx[:, t] = dz @ kernel.T
            dh = dz @ recurrent.T
            dc = dc * f
        self.grads = {"kernel": d_kernel, "recurrent": d_recurrent, "bias": d_bias}
        return dx

    def config(self):
        return {"units": self.units, "l2": self.l2}


class SelfAttention(Layer):
    """
    Single-head scaled dot-product self-attention over ``(time, features)`` inputs.

    Queries and keys have width ``key_dim``, values keep the input width and
    an output projection maps back to the input width.
    """

    kind = "attention"

    def __init__(self, key_dim: int = 1, l2: bool = False) -> None:
        super().__init__()
        self.key_dim = int(key_dim)
        self.l2 = bool(l2)
        self.regularized = ("query", "key", "value", "output") if l2 else ()

    def _build(self, input_shape, rng):
        if len(input_shape) != 2:
            raise ShapeError(f"Attention expects (time, features) inputs, got {input_shape}")
        features, key_dim = input_shape[1], self.key_dim
        self.params["query"] = glorot_uniform(rng, features, key_dim, (features, key_dim))
        self.params["query_bias"] = np.zeros(key_dim)
        self.params["key"] = glorot_uniform(rng, features, key_dim, (features, key_dim))
        self.params["key_bias"] = np.zeros(key_dim)
        self.params["value"] = glorot_uniform(rng, features, features, (features, features))
        self.params["value_bias"] = np.zeros(features)
        self.params["output"] = glorot_uniform(rng, features, features, (features, features))
        self.params["output_bias"] = np.zeros(features)
        return input_shape

    def forward(self, x, training=False, rng=None):
        p = self.params
        self._x = x
        self._q = x @ p["query"] + p["query_bias"]
        self._k = x @ p["key"] + p["key_bias"]
        self._v = x @ p["value"] + p["value_bias"]
        scores = np.einsum("btd,bsd->bts", self._q, self._k) / np.sqrt(self.key_dim)
        self.attention = softmax(scores, axis=-1)
        self._o = np.einsum("bts,bsf->btf", self.attention, self._v)
        return self._o @ p["output"] + p["output_bias"]

    def backward(self, dy):
        p = self.params
        a = self.attention
        self.grads["output"] = np.einsum("btf,btg->fg", self._o, dy)
        self.grads["output_bias"] = dy.sum(axis=(0, 1))
        d_o = dy @ p["output"].T
        d_a = np.einsum("btf,bsf->bts", d_o, self._v)
        d_v = np.einsum("bts,btf->bsf", a, d_o)
        d_scores = a * (d_a - (d_a * a).sum(axis=-1, keepdims=True)) / np.sqrt(self.key_dim)
        d_q = np.einsum("bts,bsd->btd", d_scores, self._k)
        d_k = np.einsum("bts,btd->bsd", d_scores, self._q)
        for name, grad in (("query", d_q), ("key", d_k), ("value", d_v)):
            self.grads[name] = np.einsum("btf,btd->fd", self._x, grad)
            self.grads[f"{name}_bias"] = grad.sum(axis=(0, 1))
        return d_q @ p["query"].T + d_k @ p["key"].T + d_v @ p["value"].T

    def config(self):
        return {"key_dim": self.key_dim, "l2": self.l2}


class GlobalAveragePooling1D(Layer):
    kind = "gap1d"

    def _build(self, input_shape, rng):
        return (input_shape[-1],)

    def forward(self, x, training=False, rng=None):
        self._steps = x.shape[1]
        return x.mean(axis=1)

    def backward(self, dy):
        return np.repeat(dy[:, None, :] / self._steps, self._steps, axis=1)


class BatchNorm(Layer):
    """
    Batch normalization of ``(batch, features)`` inputs.

    Training mode normalizes with the batch statistics and updates the
    running statistics; inference mode uses the running statistics.
    """

    kind = "batchnorm"

    def __init__(self, momentum: float = 0.99, epsilon: float = 1e-5) -> None:
        super().__init__()
        self.momentum = float(momentum)
        self.epsilon = float(epsilon)

    def _build(self, input_shape, rng):
        self.params["gamma"] = np.ones(input_shape)
        self.params["beta"] = np.zeros(input_shape)
        self.running_mean = np.zeros(input_shape)
        self.running_var = np.ones(input_shape)
        return input_shape

    def forward(self, x, training=False, rng=None):
        if training:
            mean, var = x.mean(axis=0), x.var(axis=0)
            self.running_mean = self.momentum * self.running_mean + (1 - self.momentum) * mean
            self.running_var = self.momentum * self.running_var + (1 - self.momentum) * var
        else:
            mean, var = self.running_mean, self.running_var
        self._training = training
        self._inv_std = 1.0 / np.sqrt(var + self.epsilon)
        self.normalized = (x - mean) * self._inv_std
        return self.params["gamma"] * self.normalized + self.params["beta"]

    def backward(self, dy):
        x_hat = self.normalized
        self.grads["gamma"] = (dy * x_hat).sum(axis=0)
        self.grads["beta"] = dy.sum(axis=0)
        d_hat = dy * self.params["gamma"]
        if not self._training:
            return d_hat * self._inv_std
        n = dy.shape[0]
        return self._inv_std / n * (n * d_hat - d_hat.sum(axis=0) - x_hat * (d_hat * x_hat).sum(axis=0))

    def config(self):
        return {"momentum": self.momentum, "epsilon": self.epsilon}

    def state(self):
        return {"running_mean": self.running_mean, "running_var": self.running_var}


LAYERS: Dict[str, Type[Layer]] = {
    layer.kind: layer
    for layer in (Flatten, Reshape, Dense, Dropout, Conv1D, MaxPool1D, LSTM, SelfAttention, GlobalAveragePooling1D, BatchNorm)
}


def make_layer(kind: str, options: dict) -> Layer:
    try:
        layer_class = LAYERS[kind]
    except KeyError as exc:
        raise ConfigurationError(f"Unknown layer {kind!r}") from exc
    return layer_class(**options)
