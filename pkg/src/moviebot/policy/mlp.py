"""Small feed-forward network with exact reverse-mode gradients.

Rectifier hidden layers, identity output. Everything is float64 and
single-threaded so training runs are bit-reproducible.
"""

from __future__ import annotations

import numpy as np


class DimensionError(Exception):
    pass


class Mlp:
    def __init__(self, layer_sizes: list[int], rng: np.random.Generator | None = None):
        self.layer_sizes = list(layer_sizes)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        rng = rng or np.random.default_rng(0)
        for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
            scale = np.sqrt(2.0 / fan_in)
            self.weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "Mlp":
        dup = Mlp.__new__(Mlp)
        dup.layer_sizes = list(self.layer_sizes)
        dup.weights = [w.copy() for w in self.weights]
        dup.biases = [b.copy() for b in self.biases]
        return dup

    def copy_from(self, other: "Mlp") -> None:
        for w, ow in zip(self.weights, other.weights):
            w[...] = ow
        for b, ob in zip(self.biases, other.biases):
            b[...] = ob

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.layer_sizes[0]:
            raise DimensionError(
                f"input width {x.shape[1]} != expected {self.layer_sizes[0]}"
            )
        return x

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Batched forward pass; 1-D input yields a 1-D output."""
        squeeze = np.asarray(x).ndim == 1
        h = self._check_input(x)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                np.maximum(h, 0.0, out=h)
        return h[0] if squeeze else h

    def forward_cached(self, x: np.ndarray):
        """Forward pass keeping pre-activation caches for backprop."""
        h = self._check_input(x)
        activations = [h]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = activations[-1] @ w + b
            if i < last:
                z = np.maximum(z, 0.0)
            activations.append(z)
        return activations

    def backward(self, activations, grad_output: np.ndarray):
        """Exact gradients given dL/dy at the output.

        Returns (weight_grads, bias_grads), summed over the batch.
        """
        grad = np.asarray(grad_output, dtype=np.float64)
        if grad.ndim == 1:
            grad = grad[None, :]
        if grad.shape != activations[-1].shape:
            raise DimensionError(
                f"output grad shape {grad.shape} != {activations[-1].shape}"
            )
        w_grads = [None] * len(self.weights)
        b_grads = [None] * len(self.biases)
        for i in range(len(self.weights) - 1, -1, -1):
            w_grads[i] = activations[i].T @ grad
            b_grads[i] = grad.sum(axis=0)
            if i > 0:
                grad = grad @ self.weights[i].T
                grad = grad * (activations[i] > 0.0)
        return w_grads, b_grads

    def sgd_step(self, w_grads, b_grads, lr: float) -> None:
        for w, g in zip(self.weights, w_grads):
            w -= lr * g
        for b, g in zip(self.biases, b_grads):
            b -= lr * g


def mlp_forward(net: Mlp, x) -> np.ndarray:
    return net.forward(x)


def mlp_grad(net: Mlp, x, loss_grad_at_output):
    """Parameter gradients of a scalar loss with the given output gradient."""
    activations = net.forward_cached(x)
    return net.backward(activations, loss_grad_at_output)
