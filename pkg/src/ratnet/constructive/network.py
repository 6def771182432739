"""
Layered rational networks and the algebra used to assemble them.

A network is a sequence of hidden layers, each an affine map followed by a
per-node activation, and a final affine output map without activation.
Weights are stored as CSR sparse arrays because the constructive builders
stack many small blocks side by side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from ratnet.approx.ratfun import (
    ComposedRational, Interval, RationalFunction, SupNormReport,
    chebyshev_grid, pole_check, relu
)
from ratnet.approx.zolotarev import ReluApproximant
from ratnet.errors import DomainError, EvaluationError
from ratnet.types.activation import Activation
from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)


# -----------------------------------------------------------------------------
# Elementary activations
# -----------------------------------------------------------------------------

class Identity:
    """
    Relay node: carries a value unchanged into the next layer.
    """

    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        return np.asarray(x, dtype=float)

    def param_count(self) -> int:
        return 0

    def node_count(self) -> int:
        return 0

    def __repr__(self) -> str:
        return 'IDENTITY'


class Relu:
    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        return relu(x)

    def param_count(self) -> int:
        return 0

    def node_count(self) -> int:
        return 1

    def __repr__(self) -> str:
        return 'RELU'


IDENTITY = Identity()
RELU = Relu()


@lru_cache(maxsize=None)  # One shared object per exponent
def power(c: int) -> RationalFunction:
    """
    x -> x^c as a polynomial activation.
    """
    if c < 1:
        raise DomainError(f'Power activation needs c >= 1, got {c}')
    return RationalFunction.polynomial([0.0] * c + [1.0])


SQUARE = power(2)


def _csr(weight: npt.ArrayLike | sp.sparray) -> sp.csr_array:
    if sp.issparse(weight):
        return sp.csr_array(weight, dtype=float)
    return sp.csr_array(np.atleast_2d(np.asarray(weight, dtype=float)))


def _vector(values: npt.ArrayLike) -> np.ndarray:
    return np.atleast_1d(np.asarray(values, dtype=float)).copy()


# -----------------------------------------------------------------------------
# Layers and networks
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Layer:
    weight: sp.csr_array
    bias: np.ndarray
    activations: tuple[Activation, ...]
    _groups: tuple[tuple[Activation, np.ndarray], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        weight = _csr(self.weight)
        bias = _vector(self.bias)
        activations = tuple(self.activations)
        object.__setattr__(self, 'weight', weight)
        object.__setattr__(self, 'bias', bias)
        object.__setattr__(self, 'activations', activations)

        if bias.shape != (weight.shape[0],):
            raise DomainError(
                f'Bias of length {bias.size} for {weight.shape[0]} nodes'
            )
        if len(activations) != weight.shape[0]:
            raise DomainError(
                f'{len(activations)} activations for {weight.shape[0]} nodes'
            )

        # Nodes sharing one activation object are evaluated together
        groups: dict[int, tuple[Activation, list[int]]] = {}
        for node, activation in enumerate(activations):
            groups.setdefault(id(activation), (activation, []))[1].append(node)
        object.__setattr__(self, '_groups', tuple(
            (activation, np.array(nodes)) for activation, nodes in groups.values()
        ))

    @property
    def width(self) -> int:
        return self.weight.shape[0]

    @property
    def fan_in(self) -> int:
        return self.weight.shape[1]

    def distinct_activations(self) -> list[Activation]:
        return [activation for activation, _ in self._groups]

    def pre_activation(self, h: np.ndarray) -> np.ndarray:
        return np.asarray(self.weight @ h.T).T + self.bias

    def apply(self, h: np.ndarray) -> np.ndarray:
        z = self.pre_activation(h)
        out = np.empty_like(z)
        for activation, nodes in self._groups:
            out[:, nodes] = activation(z[:, nodes])
        return out


@dataclass(frozen=True)
class RationalNetwork:
    input_dim: int
    layers: tuple[Layer, ...]
    output_weight: sp.csr_array
    output_bias: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, 'layers', tuple(self.layers))
        object.__setattr__(self, 'output_weight', _csr(self.output_weight))
        object.__setattr__(self, 'output_bias', _vector(self.output_bias))

        width = self.input_dim
        for index, layer in enumerate(self.layers):
            if layer.fan_in != width:
                raise DomainError(
                    f'Layer {index} expects {layer.fan_in} inputs, '
                    f'previous width is {width}'
                )
            width = layer.width
        if self.output_weight.shape[1] != width:
            raise DomainError(
                f'Output map expects {self.output_weight.shape[1]} inputs, '
                f'previous width is {width}'
            )
        if self.output_bias.shape != (self.output_weight.shape[0],):
            raise DomainError('Output bias does not match the output map')

    @property
    def output_dim(self) -> int:
        return self.output_weight.shape[0]

    # -------------------------------------------------------------------------
    # Accounting
    # -------------------------------------------------------------------------

    def size(self) -> int:
        """
        Number of nodes with a non-identity activation (composite activations
        count their internal nodes).
        """
        return sum(
            activation.node_count()
            for layer in self.layers for activation in layer.activations
        )

    def relay_count(self) -> int:
        return sum(
            isinstance(activation, Identity)
            for layer in self.layers for activation in layer.activations
        )

    def depth(self) -> int:
        return len(self.layers)

    def weight_count(self) -> int:
        maps = [(layer.weight, layer.bias) for layer in self.layers]
        maps.append((self.output_weight, self.output_bias))
        return sum(weight.nnz + bias.size for weight, bias in maps)

    def param_count(self) -> int:
        return self.weight_count() + sum(
            activation.param_count()
            for layer in self.layers for activation in layer.activations
        )

    def pole_offenders(self, interval: Interval) -> list[tuple[int, int]]:
        """
        (layer, node) pairs whose rational activation fails pole screening.
        """
        offenders = []
        for index, layer in enumerate(self.layers):
            for node, activation in enumerate(layer.activations):
                stages = _rational_stages(activation)
                if not all(pole_check(stage, interval) for stage in stages):
                    offenders.append((index, node))
        return offenders

    # -------------------------------------------------------------------------
    # Evaluation
    # -------------------------------------------------------------------------

    def evaluate(self, inputs: npt.ArrayLike) -> np.ndarray:
        """
        Inputs of shape (n, input_dim); returns shape (n, output_dim).
        """
        h = np.asarray(inputs, dtype=float)
        if h.ndim != 2 or h.shape[1] != self.input_dim:
            raise DomainError(
                f'Expected inputs of shape (n, {self.input_dim}), '
                f'got {h.shape}'
            )
        for index, layer in enumerate(self.layers):
            try:
                h = layer.apply(h)
            except EvaluationError as e:
                raise EvaluationError(
                    f'Layer {index}: {e}', x=e.x, stage=e.stage, layer=index
                ) from e
            if not np.all(np.isfinite(h)):
                raise EvaluationError(
                    f'Non-finite activation output in layer {index}',
                    layer=index
                )
        return np.asarray(self.output_weight @ h.T).T + self.output_bias

    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        """
        Scalar-input convenience: 1-D samples in, 1-D values out when both
        input and output are one dimensional.
        """
        xa = np.asarray(x, dtype=float)
        if self.input_dim == 1 and xa.ndim <= 1:
            out = self.evaluate(xa.reshape(-1, 1))
            if self.output_dim == 1:
                return out[:, 0].reshape(xa.shape)
            return out
        return self.evaluate(xa)


def _rational_stages(activation: Activation) -> list[RationalFunction]:
    if isinstance(activation, RationalFunction):
        return [activation]
    if isinstance(activation, ComposedRational):
        return list(activation.stages)
    if isinstance(activation, ReluApproximant):
        return list(activation.sign.stages)
    return []


# -----------------------------------------------------------------------------
# Network algebra
# -----------------------------------------------------------------------------

def affine_network(weight: npt.ArrayLike, bias: npt.ArrayLike) -> RationalNetwork:
    w = _csr(weight)
    return RationalNetwork(w.shape[1], (), w, bias)


def identity_network(dim: int) -> RationalNetwork:
    return affine_network(sp.identity(dim, format='csr'), np.zeros(dim))


def precompose(
    net: RationalNetwork,
    weight: npt.ArrayLike,
    bias: npt.ArrayLike
) -> RationalNetwork:
    """
    x -> net(weight @ x + bias).
    """
    w, b = _csr(weight), _vector(bias)
    if not net.layers:
        return RationalNetwork(
            w.shape[1], (),
            net.output_weight @ w,
            net.output_weight @ b + net.output_bias
        )
    first = net.layers[0]
    merged = Layer(first.weight @ w, first.weight @ b + first.bias,
                   first.activations)
    return RationalNetwork(
        w.shape[1], (merged,) + net.layers[1:],
        net.output_weight, net.output_bias
    )


def postcompose(
    net: RationalNetwork,
    weight: npt.ArrayLike,
    bias: npt.ArrayLike
) -> RationalNetwork:
    """
    x -> weight @ net(x) + bias.
    """
    w = _csr(weight)
    return RationalNetwork(
        net.input_dim, net.layers,
        w @ net.output_weight,
        w @ net.output_bias + _vector(bias)
    )


def then(first: RationalNetwork, second: RationalNetwork) -> RationalNetwork:
    """
    x -> second(first(x)).
    """
    if second.input_dim != first.output_dim:
        raise DomainError(
            f'Cannot feed {first.output_dim} outputs into '
            f'{second.input_dim} inputs'
        )
    tail = precompose(second, first.output_weight, first.output_bias)
    return RationalNetwork(
        first.input_dim, first.layers + tail.layers,
        tail.output_weight, tail.output_bias
    )


def pad(net: RationalNetwork, depth: int) -> RationalNetwork:
    """
    Extend `net` to `depth` layers with identity relays.
    """
    while net.depth() < depth:
        relay = Layer(net.output_weight, net.output_bias,
                      (IDENTITY,) * net.output_dim)
        net = RationalNetwork(
            net.input_dim, net.layers + (relay,),
            sp.identity(net.output_dim, format='csr'),
            np.zeros(net.output_dim)
        )
    return net


def stack(nets: Sequence[RationalNetwork]) -> RationalNetwork:
    """
    Run networks side by side on the same input; outputs are concatenated.
    """
    if not nets:
        raise DomainError('Nothing to stack')
    input_dim = nets[0].input_dim
    if any(net.input_dim != input_dim for net in nets):
        raise DomainError('Stacked networks must share their input dimension')

    depth = max(net.depth() for net in nets)
    nets = [pad(net, depth) for net in nets]

    layers = []
    for i in range(depth):
        parts = [net.layers[i] for net in nets]
        # The first layer reads the shared input; later ones their own block
        combine = sp.vstack if i == 0 else sp.block_diag
        layers.append(Layer(
            _csr(combine([part.weight for part in parts], format='csr')),
            np.concatenate([part.bias for part in parts]),
            tuple(a for part in parts for a in part.activations)
        ))

    combine = sp.vstack if depth == 0 else sp.block_diag
    return RationalNetwork(
        input_dim, tuple(layers),
        _csr(combine([net.output_weight for net in nets], format='csr')),
        np.concatenate([net.output_bias for net in nets])
    )


def _pairwise_products(width: int) -> RationalNetwork:
    """
    One layer multiplying outputs (0,1), (2,3), ... with the square gadget;
    an odd leftover is relayed.
    """
    rows, activations, out_rows = [], [], []
    for start in range(0, width - 1, 2):
        a, b = np.zeros(width), np.zeros(width)
        a[start], b[start + 1] = 1.0, 1.0
        rows.extend([a, b, a - b])
        activations.extend([SQUARE] * 3)
        out_rows.append((len(rows) - 3, [0.5, 0.5, -0.5]))
    if width % 2:
        c = np.zeros(width)
        c[-1] = 1.0
        rows.append(c)
        activations.append(IDENTITY)
        out_rows.append((len(rows) - 1, [1.0]))

    output = np.zeros((len(out_rows), len(rows)))
    for i, (start, coeffs) in enumerate(out_rows):
        output[i, start:start + len(coeffs)] = coeffs

    layer = Layer(np.array(rows), np.zeros(len(rows)), tuple(activations))
    return RationalNetwork(width, (layer,), output, np.zeros(len(out_rows)))


def product_tree(net: RationalNetwork) -> RationalNetwork:
    """
    Multiply all outputs of `net` together with product gadgets.
    """
    while net.output_dim > 1:
        net = then(net, _pairwise_products(net.output_dim))
    return net


def lift(net: RationalNetwork, coordinate: int, dim: int) -> RationalNetwork:
    """
    Run a one-input network on one coordinate of a `dim`-dimensional input.
    """
    selector = np.zeros((1, dim))
    selector[0, coordinate] = 1.0
    return precompose(net, selector, np.zeros(1))


def replace_activations(
    net: RationalNetwork,
    choose: Callable[[int, Activation], Activation]
) -> RationalNetwork:
    """
    Same weights, activation of each node in layer i replaced by
    choose(i, activation).
    """
    layers = tuple(
        Layer(layer.weight, layer.bias,
              tuple(choose(index, a) for a in layer.activations))
        for index, layer in enumerate(net.layers)
    )
    return RationalNetwork(
        net.input_dim, layers, net.output_weight, net.output_bias
    )


# -----------------------------------------------------------------------------
# Random ReLU networks and certification
# -----------------------------------------------------------------------------

def random_relu_network(
    layer_dims: Sequence[int],
    rng: np.random.Generator,
    norm_range: tuple[float, float] = (0.5, 1.0)
) -> RationalNetwork:
    """
    Random ReLU network whose every node (output included) satisfies
    ||a||_1 + |b| <= 1.
    """
    if len(layer_dims) < 2:
        raise DomainError(f'Need input and output dims, got {layer_dims}')

    def normalized(fan_out: int, fan_in: int) -> tuple[np.ndarray, np.ndarray]:
        w = rng.standard_normal((fan_out, fan_in))
        b = rng.standard_normal(fan_out)
        norms = np.abs(w).sum(axis=1) + np.abs(b)
        target = rng.uniform(*norm_range, size=fan_out)
        return w * (target / norms)[:, None], b * target / norms

    layers = []
    for fan_in, fan_out in zip(layer_dims[:-2], layer_dims[1:-1]):
        w, b = normalized(fan_out, fan_in)
        layers.append(Layer(w, b, (RELU,) * fan_out))
    w, b = normalized(layer_dims[-1], layer_dims[-2])
    return RationalNetwork(layer_dims[0], tuple(layers), w, b)


def sample_domain(
    dim: int,
    domain: Interval,
    n_grid: int,
    n_random: int = 0,
    rng: Optional[np.random.Generator] = None
) -> np.ndarray:
    """
    Chebyshev tensor grid (about `n_grid` points) plus uniform random samples.
    """
    per_axis = max(2, math.ceil(n_grid ** (1.0 / dim)))
    axis = chebyshev_grid(domain, per_axis if dim > 1 else n_grid)
    mesh = np.meshgrid(*([axis] * dim), indexing='ij')
    points = np.column_stack([m.ravel() for m in mesh])
    if n_random:
        rng = rng if rng is not None else np.random.default_rng(0)
        extra = rng.uniform(domain.lo, domain.hi, size=(n_random, dim))
        points = np.vstack([points, extra])
    return points


def certify(
    net: RationalNetwork,
    target: Callable[[np.ndarray], npt.ArrayLike],
    domain: Interval,
    n_grid: int = 10_000,
    n_random: int = 0,
    rng: Optional[np.random.Generator] = None
) -> SupNormReport:
    """
    Max |net - target| over `sample_domain` points. `target` receives the
    (n, input_dim) sample array and returns (n,) or (n, output_dim) values.
    The reported argmax is the first coordinate of the worst sample.
    """
    points = sample_domain(net.input_dim, domain, n_grid, n_random, rng)
    values = net.evaluate(points)
    expected = np.asarray(target(points), dtype=float).reshape(values.shape)
    gap = np.max(np.abs(values - expected), axis=1)
    index = int(np.argmax(gap))
    report = SupNormReport(
        grid_size=points.shape[0],
        max_abs_error=float(gap[index]),
        argmax=float(points[index, 0])
    )
    logger.debug(f'Certified network of size {net.size()}: {report}')
    return report


def iter_activations(net: RationalNetwork) -> Iterable[Activation]:
    for layer in net.layers:
        yield from layer.activations
