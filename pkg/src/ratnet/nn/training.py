"""
Seeded mini-batch training with Adam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
import pandas as pd

from ratnet.errors import ConfigError, DomainError, TrainingError
from ratnet.nn.activations import ActivationKind
from ratnet.nn.model import DEFAULT_BOUND, DenseRationalNet, backward, loss_mse
from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)

# Loss above this counts as divergence
DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    epochs: int = 500
    batch_size: int = 100
    learning_rate: float = 1e-3
    optimizer: str = 'adam'
    loss: str = 'mse'
    val_fraction: float = 0.5
    bound: float = DEFAULT_BOUND

    def __post_init__(self) -> None:
        if self.optimizer != 'adam':
            raise ConfigError(f'Unsupported optimizer {self.optimizer!r}')
        if self.loss != 'mse':
            raise ConfigError(f'Unsupported loss {self.loss!r}')
        if self.epochs < 0:
            raise ConfigError(f'epochs must be >= 0, got {self.epochs}')
        if self.batch_size < 1:
            raise ConfigError(f'batch_size must be >= 1, got {self.batch_size}')
        if not self.learning_rate > 0:
            raise ConfigError('learning rate must be positive')
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError(
                f'val_fraction must lie in [0, 1), got {self.val_fraction}'
            )
        if not self.bound > 0:
            raise ConfigError(f'bound must be positive, got {self.bound}')


class Adam:
    def __init__(
        self,
        net: DenseRationalNet,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8
    ) -> None:
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p) for name, p in net.named_parameters()}
        self.v = {name: np.zeros_like(p) for name, p in net.named_parameters()}

    def step(self, net: DenseRationalNet, grads: dict[str, np.ndarray]) -> None:
        """
        Update the parameters of `net` in place.
        """
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for name, param in net.named_parameters():
            g = grads[name]
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            param -= self.learning_rate * (m / correction1) / (
                np.sqrt(v / correction2) + self.eps
            )


@dataclass
class TrainingHistory:
    epoch: list[int] = field(default_factory=list)
    train_mse: list[float] = field(default_factory=list)
    val_mse: list[float] = field(default_factory=list)
    rollbacks: int = 0

    def record(self, epoch: int, train: float, val: float) -> None:
        self.epoch.append(epoch)
        self.train_mse.append(train)
        self.val_mse.append(val)

    @property
    def final_val_mse(self) -> float:
        return self.val_mse[-1]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'epoch': self.epoch,
            'train_mse': self.train_mse,
            'val_mse': self.val_mse,
        })


def oscillation(history: TrainingHistory, tail: float = 0.5) -> float:
    """
    Std of successive validation-loss differences, taken on log10 val_mse
    over the last `tail` share of epochs. A steady geometric decay scores 0
    whatever its rate or level.
    """
    if not 0.0 < tail <= 1.0:
        raise DomainError(f'tail must lie in (0, 1], got {tail}')
    values = np.asarray(history.val_mse, dtype=float)
    start = int(len(values) * (1.0 - tail))
    logs = np.log10(np.maximum(values[start:], np.finfo(float).tiny))
    diffs = np.diff(logs)
    return float(np.std(diffs)) if diffs.size else 0.0


def split(
    n: int,
    val_fraction: float,
    rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """
    Seeded shuffle into (train, validation) indices. With no validation
    share the training set doubles as validation set.
    """
    order = rng.permutation(n)
    n_val = int(round(n * val_fraction))
    if n_val >= n:
        raise DomainError('Validation split leaves no training samples')
    train_idx, val_idx = order[n_val:], order[:n_val]
    return train_idx, (val_idx if n_val else train_idx)


def _rollback_denominators(
    net: DenseRationalNet,
    before: dict[int, np.ndarray]
) -> int:
    # Undo the denominator update of every layer that now fails pole screening
    rolled = 0
    for i in net.pole_offenders():
        spec = net.activations[i]
        spec.denom[:] = before[i]
        rolled += 1
        logger.warning(
            f'Layer {i}: denominator step rejected, pole on '
            f'[-{net.bound}, {net.bound}]'
        )
    return rolled


def _check_loss(value: float, epoch: int, history: TrainingHistory) -> None:
    if not math.isfinite(value) or value > DIVERGENCE_LIMIT:
        raise TrainingError(
            f'Training diverged at epoch {epoch}: loss {value!r}',
            history=history
        )


def train(
    net: DenseRationalNet,
    inputs: npt.ArrayLike,
    targets: npt.ArrayLike,
    config: TrainConfig
) -> tuple[DenseRationalNet, TrainingHistory]:
    """
    Train a copy of `net`; returns it with the per-epoch loss history
    (epoch 0 is the initial state).
    """
    x = np.asarray(inputs, dtype=float)
    y = np.asarray(targets, dtype=float).reshape(x.shape[0], -1)

    net = net.copy()
    net.bound = config.bound
    offenders = net.pole_offenders()
    if offenders:
        raise DomainError(
            f'Activations of layers {offenders} have poles on '
            f'[-{config.bound}, {config.bound}]'
        )

    rng = np.random.default_rng(config.seed)
    train_idx, val_idx = split(x.shape[0], config.val_fraction, rng)
    optimizer = Adam(net, config.learning_rate)
    rational_layers = [
        i for i, spec in enumerate(net.activations)
        if spec.kind is ActivationKind.RATIONAL
    ]

    history = TrainingHistory()

    def evaluate(epoch: int) -> None:
        train_loss = loss_mse(net, x[train_idx], y[train_idx])
        val_loss = loss_mse(net, x[val_idx], y[val_idx])
        history.record(epoch, train_loss, val_loss)
        _check_loss(train_loss, epoch, history)
        _check_loss(val_loss, epoch, history)

    evaluate(0)
    kinds = sorted({spec.kind.value for spec in net.activations})
    logger.info(
        f'Training {net.layer_dims} ({", ".join(kinds) or "affine"}) for '
        f'{config.epochs} epochs, {train_idx.size} train / {val_idx.size} '
        f'val samples, initial val MSE {history.final_val_mse!r}'
    )

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(train_idx)
        for start in range(0, order.size, config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, grads = backward(net, x[batch], y[batch])
            _check_loss(loss, epoch, history)

            before = {i: net.activations[i].denom.copy()
                      for i in rational_layers}
            optimizer.step(net, grads)
            if rational_layers:
                history.rollbacks += _rollback_denominators(net, before)

        evaluate(epoch)
        logger.debug(
            f'Epoch {epoch}: train {history.train_mse[-1]!r}, '
            f'val {history.final_val_mse!r}'
        )

    logger.info(
        f'Finished training: final val MSE {history.final_val_mse!r}, '
        f'{history.rollbacks} denominator rollback(s)'
    )
    return net, history
