"""
The `ratnet-v1` line-oriented checkpoint format.

Dense (trainable) networks and constructive graph networks share one
grammar: a header, per-layer blocks of weights, biases and activation
records, then the output map. Reals are written with 17 significant digits
so a round trip reproduces every float64 exactly.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterator, Union

import numpy as np

from ratnet.approx.ratfun import ComposedRational, RationalFunction
from ratnet.approx.zolotarev import ReluApproximant
from ratnet.constructive.network import (
    IDENTITY, RELU, Identity, Layer, RationalNetwork, Relu
)
from ratnet.errors import CheckpointError
from ratnet.nn.activations import ActivationKind, ActivationSpec
from ratnet.nn.model import DenseRationalNet
from ratnet.storage.files import write_atomic
from ratnet.types.activation import Activation
from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)

MAGIC = 'ratnet-v1'

Network = Union[DenseRationalNet, RationalNetwork]


def _fmt(values) -> str:
    return ' '.join(format(float(v), '.17g') for v in np.ravel(values))


# -----------------------------------------------------------------------------
# Writing
# -----------------------------------------------------------------------------

def _rational_lines(r: RationalFunction) -> list[str]:
    return [f'rational {r.r_p} {r.r_q}', _fmt(r.numer), _fmt(r.denom)]


def _graph_activation_lines(activation: Activation) -> list[str]:
    match activation:
        case Identity():
            return ['identity']
        case Relu():
            return ['relu']
        case RationalFunction():
            return _rational_lines(activation)
        case ComposedRational():
            lines = [f'composed {len(activation)}']
            for stage in activation.stages:
                lines.extend(_rational_lines(stage))
            return lines
        case ReluApproximant():
            lines = [
                f'relu-approx {_fmt([activation.epsilon])} '
                f'{_fmt([activation.ell])} {activation.stages}'
            ]
            for stage in activation.sign.stages:
                lines.extend(_rational_lines(stage))
            return lines
        case _:
            raise CheckpointError(
                f'Cannot serialize activation {type(activation).__name__}'
            )


def _dense_activation_lines(spec: ActivationSpec) -> list[str]:
    match spec.kind:
        case ActivationKind.RATIONAL:
            r_p, r_q = spec.rational_type
            return [f'rational {r_p} {r_q}', _fmt(spec.numer), _fmt(spec.denom)]
        case ActivationKind.POLYNOMIAL:
            return [f'polynomial {spec.params.size - 1}', _fmt(spec.params)]
        case kind:
            return [kind.value]


def _matrix_lines(weight: np.ndarray, bias: np.ndarray) -> list[str]:
    lines = ['weight']
    lines.extend(_fmt(row) for row in weight)
    lines.extend(['bias', _fmt(bias)])
    return lines


def dumps(net: Network) -> str:
    if isinstance(net, DenseRationalNet):
        kind = 'dense'
        blocks = [
            (w, b, [spec], [0] * w.shape[0], _dense_activation_lines)
            for w, b, spec in zip(net.weights, net.biases, net.activations)
        ]
        output = (net.weights[-1], net.biases[-1])
        input_dim = net.layer_dims[0]
    elif isinstance(net, RationalNetwork):
        kind = 'graph'
        blocks = []
        for layer in net.layers:
            distinct = layer.distinct_activations()
            index = {id(a): i for i, a in enumerate(distinct)}
            assign = [index[id(a)] for a in layer.activations]
            blocks.append((layer.weight.toarray(), layer.bias, distinct,
                           assign, _graph_activation_lines))
        output = (net.output_weight.toarray(), net.output_bias)
        input_dim = net.input_dim
    else:
        raise CheckpointError(f'Cannot serialize {type(net).__name__}')

    lines = [MAGIC, f'network {kind}', f'input_dim {input_dim}',
             f'layers {len(blocks)}']
    for i, (weight, bias, distinct, assign, render) in enumerate(blocks):
        lines.append(f'layer {i} {weight.shape[0]} {weight.shape[1]}')
        lines.extend(_matrix_lines(weight, bias))
        lines.append(f'activations {len(distinct)}')
        for activation in distinct:
            lines.extend(['activation ' + line if j == 0 else line
                          for j, line in enumerate(render(activation))])
        lines.append('assign ' + ' '.join(str(a) for a in assign))

    weight, bias = output
    lines.append(f'output {weight.shape[0]} {weight.shape[1]}')
    lines.extend(_matrix_lines(weight, bias))
    lines.append('end')
    return '\n'.join(lines) + '\n'


def save_network(net: Network, path: str | Path) -> Path:
    target = write_atomic(path, dumps(net))
    logger.info(f'Saved {type(net).__name__} checkpoint to {target}')
    return target


# -----------------------------------------------------------------------------
# Reading
# -----------------------------------------------------------------------------

class _Lines:
    def __init__(self, text: str) -> None:
        self._lines = [
            (number, line.strip())
            for number, line in enumerate(text.splitlines(), start=1)
            if line.strip()
        ]
        self._pos = 0

    def next(self) -> tuple[int, str]:
        if self._pos >= len(self._lines):
            raise CheckpointError('Unexpected end of checkpoint')
        item = self._lines[self._pos]
        self._pos += 1
        return item

    def fields(self, keyword: str, count: int | None = None) -> list[str]:
        number, line = self.next()
        parts = line.split()
        if parts[0] != keyword or (count is not None and len(parts) != count + 1):
            raise CheckpointError(
                f'Line {number}: expected {keyword!r} record, got {line!r}'
            )
        return parts[1:]

    def reals(self, count: int | None = None) -> np.ndarray:
        number, line = self.next()
        try:
            values = np.array([float(v) for v in line.split()])
        except ValueError:
            raise CheckpointError(
                f'Line {number}: expected numbers, got {line!r}'
            ) from None
        if count is not None and values.size != count:
            raise CheckpointError(
                f'Line {number}: expected {count} values, got {values.size}'
            )
        return values

    def done(self) -> Iterator[tuple[int, str]]:
        yield from self._lines[self._pos:]


def _ints(values: list[str], what: str) -> list[int]:
    try:
        return [int(v) for v in values]
    except ValueError:
        raise CheckpointError(f'Malformed {what}: {values}') from None


def _read_matrix(lines: _Lines, rows: int, cols: int) -> tuple[np.ndarray, np.ndarray]:
    lines.fields('weight', 0)
    weight = np.array([lines.reals(cols) for _ in range(rows)]).reshape(rows, cols)
    lines.fields('bias', 0)
    bias = lines.reals(rows) if rows else np.zeros(0)
    return weight, bias


def _read_rational(lines: _Lines, head: list[str]) -> RationalFunction:
    r_p, r_q = _ints(head, 'rational record')
    numer, denom = lines.reals(r_p + 1), lines.reals(r_q + 1)
    try:
        return RationalFunction.from_coefficients(numer, denom)
    except ValueError as e:
        raise CheckpointError(f'Invalid rational activation: {e}') from e


def _read_stages(lines: _Lines, count: int) -> ComposedRational:
    return ComposedRational(tuple(
        _read_rational(lines, lines.fields('rational', 2))
        for _ in range(count)
    ))


def _read_graph_activation(lines: _Lines) -> Activation:
    kind, *args = lines.fields('activation')
    match kind, len(args):
        case 'identity', 0:
            return IDENTITY
        case 'relu', 0:
            return RELU
        case 'rational', 2:
            return _read_rational(lines, args)
        case 'composed', 1:
            return _read_stages(lines, _ints(args, 'stage count')[0])
        case 'relu-approx', 3:
            try:
                epsilon, ell = float(args[0]), float(args[1])
            except ValueError:
                raise CheckpointError(f'Malformed relu-approx record {args}') from None
            sign = _read_stages(lines, _ints(args[2:], 'stage count')[0])
            return ReluApproximant(epsilon, ell, sign)
    raise CheckpointError(f'Unknown graph activation {kind!r} {args}')


def _read_dense_activation(lines: _Lines) -> ActivationSpec:
    kind, *args = lines.fields('activation')
    match kind, len(args):
        case 'rational', 2:
            r_p, r_q = _ints(args, 'rational record')
            params = np.concatenate([lines.reals(r_p + 1), lines.reals(r_q + 1)])
            return ActivationSpec(ActivationKind.RATIONAL, params, (r_p, r_q))
        case 'polynomial', 1:
            degree = _ints(args, 'polynomial degree')[0]
            return ActivationSpec(ActivationKind.POLYNOMIAL, lines.reals(degree + 1))
        case ('relu' | 'sinusoid'), 0:
            return ActivationSpec(ActivationKind(kind))
    raise CheckpointError(f'Unknown dense activation {kind!r} {args}')


def loads(text: str) -> Network:
    lines = _Lines(text)
    number, magic = lines.next()
    if magic != MAGIC:
        raise CheckpointError(f'Not a {MAGIC} checkpoint (line {number})')

    (kind,) = lines.fields('network', 1)
    if kind not in ('dense', 'graph'):
        raise CheckpointError(f'Unknown network kind {kind!r}')
    (input_dim,) = _ints(lines.fields('input_dim', 1), 'input_dim')
    (n_layers,) = _ints(lines.fields('layers', 1), 'layer count')

    read_activation = _read_graph_activation if kind == 'graph' else _read_dense_activation
    blocks = []
    for i in range(n_layers):
        index, width, fan_in = _ints(lines.fields('layer', 3), 'layer header')
        if index != i:
            raise CheckpointError(f'Layer {index} found where {i} was expected')
        weight, bias = _read_matrix(lines, width, fan_in)
        (count,) = _ints(lines.fields('activations', 1), 'activation count')
        distinct = [read_activation(lines) for _ in range(count)]
        assign = _ints(lines.fields('assign', width), 'assignment')
        if any(not 0 <= a < count for a in assign):
            raise CheckpointError(f'Layer {i}: assignment out of range')
        blocks.append((weight, bias, distinct, assign))

    out_dim, fan_in = _ints(lines.fields('output', 2), 'output header')
    out_weight, out_bias = _read_matrix(lines, out_dim, fan_in)
    lines.fields('end', 0)
    trailing = list(lines.done())
    if trailing:
        raise CheckpointError(f'Trailing content after end (line {trailing[0][0]})')

    try:
        if kind == 'graph':
            layers = tuple(
                Layer(w, b, tuple(distinct[a] for a in assign))
                for w, b, distinct, assign in blocks
            )
            return RationalNetwork(input_dim, layers, out_weight, out_bias)

        if any(len(distinct) != 1 for _, _, distinct, _ in blocks):
            raise CheckpointError('Dense layers carry exactly one activation')
        dims = (input_dim,) + tuple(w.shape[0] for w, _, _, _ in blocks) + (out_dim,)
        return DenseRationalNet(
            dims,
            [w for w, _, _, _ in blocks] + [out_weight],
            [b for _, b, _, _ in blocks] + [out_bias],
            [distinct[0] for _, _, distinct, _ in blocks]
        )
    except CheckpointError:
        raise
    except ValueError as e:
        raise CheckpointError(f'Inconsistent checkpoint: {e}') from e


def load_network(path: str | Path) -> Network:
    source = Path(path)
    try:
        text = source.read_text(encoding='utf-8')
    except OSError as e:
        raise CheckpointError(f'Cannot read checkpoint {source}: {e}') from e
    net = loads(text)
    logger.info(f'Loaded {type(net).__name__} from {source}')
    return net
