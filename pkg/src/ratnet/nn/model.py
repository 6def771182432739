"""
Dense networks with one shared activation per hidden layer: forward pass,
mean squared error and reverse-mode gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt

from ratnet.errors import (
    DomainError, EvaluationError, NumericError, PreconditionError
)
from ratnet.nn.activations import ActivationKind, ActivationSpec
from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)

# Default running range [-B, B] for pole screening
DEFAULT_BOUND = 10.0


@dataclass
class DenseRationalNet:
    """
    layer_dims = (d_in, h_1, ..., h_L, d_out). Weights have shape
    (fan_out, fan_in). Hidden layer i applies activations[i]; the output
    layer is affine.
    """
    layer_dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: list[ActivationSpec]
    bound: float = DEFAULT_BOUND
    _names: list[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.layer_dims = tuple(int(d) for d in self.layer_dims)
        if len(self.layer_dims) < 2 or min(self.layer_dims) < 1:
            raise DomainError(f'Invalid layer dims {self.layer_dims}')

        n_maps = len(self.layer_dims) - 1
        if len(self.weights) != n_maps or len(self.biases) != n_maps:
            raise DomainError(
                f'{self.layer_dims} needs {n_maps} weight matrices and biases'
            )
        if len(self.activations) != n_maps - 1:
            raise DomainError(
                f'{self.layer_dims} needs {n_maps - 1} hidden activations'
            )

        self.weights = [np.array(w, dtype=float) for w in self.weights]
        self.biases = [np.array(b, dtype=float).ravel() for b in self.biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            shape = (self.layer_dims[i + 1], self.layer_dims[i])
            if w.shape != shape or b.shape != (shape[0],):
                raise DomainError(
                    f'Layer {i}: expected weight {shape} and bias '
                    f'({shape[0]},), got {w.shape} and {b.shape}'
                )

        self._names = []
        for i in range(n_maps):
            self._names.extend([f'weight{i}', f'bias{i}'])
            if i < n_maps - 1 and self.activations[i].param_count():
                self._names.append(f'activation{i}')

    @classmethod
    def initialize(
        cls,
        layer_dims: Sequence[int],
        activation: ActivationKind | str,
        seed: int = 0,
        rational_type: tuple[int, int] = (3, 2),
        bound: float = DEFAULT_BOUND
    ) -> DenseRationalNet:
        """
        Glorot-uniform weights, zero biases, one fresh activation per hidden
        layer. Nets with the same dims and seed get the same weights
        whatever the activation.
        """
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        activations = [
            ActivationSpec.create(activation, rational_type)
            for _ in range(len(layer_dims) - 2)
        ]
        return cls(tuple(layer_dims), weights, biases, activations, bound)

    @property
    def hidden_layers(self) -> int:
        return len(self.activations)

    def parameter_names(self) -> list[str]:
        return list(self._names)

    def named_parameters(self) -> list[tuple[str, np.ndarray]]:
        """
        (name, array) pairs in a fixed order; arrays are live references.
        """
        return [(name, self.parameter(name)) for name in self._names]

    def parameter(self, name: str) -> np.ndarray:
        for prefix, store in (('weight', self.weights), ('bias', self.biases)):
            if name.startswith(prefix):
                return store[int(name[len(prefix):])]
        if name.startswith('activation'):
            return self.activations[int(name[len('activation'):])].params
        raise KeyError(name)

    def trainable_param_count(self) -> int:
        return sum(array.size for _, array in self.named_parameters())

    def pole_offenders(self) -> list[int]:
        return [
            i for i, spec in enumerate(self.activations)
            if not spec.poles_ok(self.bound)
        ]

    def copy(self) -> DenseRationalNet:
        return DenseRationalNet(
            self.layer_dims,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            [spec.copy() for spec in self.activations],
            self.bound
        )

    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        return forward(self, x)


@dataclass
class ForwardTrace:
    inputs: np.ndarray
    pre_activations: list[np.ndarray]
    hidden: list[np.ndarray]
    output: np.ndarray


def _as_batch(net: DenseRationalNet, x: npt.ArrayLike) -> np.ndarray:
    xa = np.asarray(x, dtype=float)
    batch = xa.reshape(1, -1) if xa.ndim == 1 else xa
    if batch.ndim != 2 or batch.shape[1] != net.layer_dims[0]:
        raise DomainError(
            f'Expected inputs with {net.layer_dims[0]} features, got '
            f'shape {xa.shape}'
        )
    return batch


def trace(net: DenseRationalNet, inputs: np.ndarray) -> ForwardTrace:
    h = inputs
    pre, hidden = [], []
    for i, spec in enumerate(net.activations):
        z = h @ net.weights[i].T + net.biases[i]
        h = spec(z)
        if not np.all(np.isfinite(h)):
            bad = np.argwhere(~np.isfinite(h))[0]
            raise EvaluationError(
                f'Non-finite {spec.kind.value} activation output in layer '
                f'{i} (node {bad[1]}, pre-activation {z[tuple(bad)]!r})',
                x=float(z[tuple(bad)]),
                layer=i
            )
        pre.append(z)
        hidden.append(h)
    output = h @ net.weights[-1].T + net.biases[-1]
    return ForwardTrace(inputs, pre, hidden, output)


def forward(net: DenseRationalNet, x: npt.ArrayLike) -> np.ndarray:
    """
    A single input vector gives an output vector; an (n, d_in) batch gives
    (n, d_out). Rational activations must pass pole screening on
    [-net.bound, net.bound] first.
    """
    offenders = net.pole_offenders()
    if offenders:
        raise PreconditionError(
            f'Activations of layers {offenders} have a pole on '
            f'[-{net.bound}, {net.bound}]',
            offenders=offenders
        )
    batch = _as_batch(net, x)
    output = trace(net, batch).output
    return output[0] if np.ndim(x) == 1 else output


def _as_targets(net: DenseRationalNet, targets: npt.ArrayLike, n: int) -> np.ndarray:
    y = np.asarray(targets, dtype=float).reshape(n, -1)
    if y.shape[1] != net.layer_dims[-1]:
        raise DomainError(
            f'Expected {net.layer_dims[-1]} target values per sample, '
            f'got {y.shape[1]}'
        )
    return y


def loss_mse(
    net: DenseRationalNet,
    inputs: npt.ArrayLike,
    targets: npt.ArrayLike
) -> float:
    """
    (1/N) sum_i |net(x_i) - u_i|^2.
    """
    batch = _as_batch(net, inputs)
    if batch.shape[0] == 0:
        raise DomainError('Loss needs at least one sample')
    y = _as_targets(net, targets, batch.shape[0])
    residual = trace(net, batch).output - y
    return float(np.sum(residual ** 2) / batch.shape[0])


def backward(
    net: DenseRationalNet,
    inputs: npt.ArrayLike,
    targets: npt.ArrayLike,
    per_node: bool = False
) -> tuple[float, dict[str, np.ndarray]]:
    """
    Loss and exact gradients keyed like `named_parameters`.

    With per_node=True activation gradients keep one row per node instead of
    the shared sum over the layer.
    """
    batch = _as_batch(net, inputs)
    n = batch.shape[0]
    if n == 0:
        raise DomainError('Gradients need at least one sample')
    y = _as_targets(net, targets, n)

    t = trace(net, batch)
    residual = t.output - y
    loss = float(np.sum(residual ** 2) / n)

    grads: dict[str, np.ndarray] = {}
    upstream = 2.0 * residual / n
    last = len(net.weights) - 1
    below = t.hidden[-1] if t.hidden else batch
    grads[f'weight{last}'] = upstream.T @ below
    grads[f'bias{last}'] = upstream.sum(axis=0)
    upstream = upstream @ net.weights[last]

    for i in range(net.hidden_layers - 1, -1, -1):
        spec, z = net.activations[i], t.pre_activations[i]
        if spec.param_count():
            grads[f'activation{i}'] = spec.param_gradient(
                z, upstream, per_node=per_node
            )
        dz = upstream * spec.derivative(z)
        below = t.hidden[i - 1] if i else batch
        grads[f'weight{i}'] = dz.T @ below
        grads[f'bias{i}'] = dz.sum(axis=0)
        upstream = dz @ net.weights[i]

    _check_gradients(grads, net)
    ordered = {name: grads[name] for name in net.parameter_names()}
    return loss, ordered


def _check_gradients(grads: dict[str, np.ndarray], net: DenseRationalNet) -> None:
    for name, grad in grads.items():
        bad = ~np.isfinite(grad)
        if not np.any(bad):
            continue
        index = tuple(int(v) for v in np.argwhere(bad)[0])
        detail = name
        if name.startswith('activation'):
            spec = net.activations[int(name[len('activation'):])]
            coefficient = index[-1]
            if spec.kind is ActivationKind.RATIONAL:
                r_p = spec.rational_type[0]
                detail = (f'{name} numerator a_{coefficient}'
                          if coefficient <= r_p
                          else f'{name} denominator b_{coefficient - r_p - 1}')
        raise NumericError(
            f'Non-finite gradient for {detail} at index {index}',
            diagnostics={'parameter': name, 'index': index}
        )


def param_summary(net: DenseRationalNet) -> list[tuple[str, Optional[str], int]]:
    """
    (parameter name, activation kind or None, size) rows.
    """
    rows = []
    for name, array in net.named_parameters():
        kind = None
        if name.startswith('activation'):
            kind = net.activations[int(name[len('activation'):])].kind.value
        rows.append((name, kind, array.size))
    return rows
