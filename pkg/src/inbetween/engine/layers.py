"""Network layers on top of the tensor engine: linear, feed-forward, LSTM."""
from __future__ import annotations

import numpy as np

from . import tensor
from .tensor import Tensor, matmul, plu, relu, sigmoid, tanh


class Parameter(Tensor):
    """Named trainable tensor."""

    __slots__ = ("name",)

    def __init__(self, name, values):
        super().__init__(values, requires_grad=True)
        self.name = name


def uniform_init(rng, shape, fan_in):
    bound = np.sqrt(1.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Linear:
    def __init__(self, name, in_dim, out_dim, rng):
        self.weight = Parameter(f"{name}.weight", uniform_init(rng, (in_dim, out_dim), in_dim))
        self.bias = Parameter(f"{name}.bias", uniform_init(rng, (out_dim,), in_dim))

    def __call__(self, x):
        return matmul(x, self.weight) + self.bias

    def parameters(self):
        return [self.weight, self.bias]


_ACTIVATIONS = {"plu": plu, "relu": relu, "tanh": tanh, "sigmoid": sigmoid, "linear": None}


class FeedForward:
    """Stack of linear layers with one activation type.

    `activate_last` controls whether the final layer is activated too (the
    encoders) or linear (the decoder output).
    """

    def __init__(self, name, dims, rng, activation="plu", activate_last=True):
        self.layers = [
            Linear(f"{name}.{i}", dims[i], dims[i + 1], rng) for i in range(len(dims) - 1)
        ]
        self.activation = _ACTIVATIONS[activation]
        self.activate_last = activate_last

    def __call__(self, x):
        for i, layer in enumerate(self.layers):
            x = layer(x)
            last = i == len(self.layers) - 1
            if self.activation is not None and (self.activate_last or not last):
                x = self.activation(x)
        return x

    def parameters(self):
        return [p for layer in self.layers for p in layer.parameters()]


class LSTMCell:
    """Standard LSTM cell; gate order (input, forget, candidate, output).

    Forget-gate bias initialized to +1.
    """

    def __init__(self, name, in_dim, hidden_dim, rng):
        self.hidden_dim = hidden_dim
        self.w_x = Parameter(f"{name}.w_x", uniform_init(rng, (in_dim, 4 * hidden_dim), in_dim))
        self.w_h = Parameter(f"{name}.w_h", uniform_init(rng, (hidden_dim, 4 * hidden_dim), hidden_dim))
        bias = uniform_init(rng, (4 * hidden_dim,), hidden_dim)
        bias[hidden_dim : 2 * hidden_dim] += 1.0
        self.bias = Parameter(f"{name}.bias", bias)

    def initial_state(self, batch):
        zeros = np.zeros((batch, self.hidden_dim))
        return Tensor(zeros), Tensor(zeros.copy())

    def __call__(self, x, state):
        h, c = state
        gates = matmul(x, self.w_x) + matmul(h, self.w_h) + self.bias
        n = self.hidden_dim
        i = sigmoid(gates[..., 0 * n : 1 * n])
        f = sigmoid(gates[..., 1 * n : 2 * n])
        g = tanh(gates[..., 2 * n : 3 * n])
        o = sigmoid(gates[..., 3 * n : 4 * n])
        c_next = f * c + i * g
        h_next = o * tanh(c_next)
        return h_next, (h_next, c_next)

    def parameters(self):
        return [self.w_x, self.w_h, self.bias]


def lstm_step(cell: LSTMCell, x, h, c):
    """One LSTM step on raw arrays; returns (h', c') arrays."""
    with tensor.no_grad():
        _, (h2, c2) = cell(Tensor(x), (Tensor(h), Tensor(c)))
    return h2.values, c2.values
