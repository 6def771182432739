"""
Plain-text experiment configuration: one `key=value` per line, `#` starts a
comment. RATNET_SEED in the environment overrides the seed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable

from ratnet.errors import ConfigError
from ratnet.nn.training import TrainConfig
from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)

SEED_ENV = 'RATNET_SEED'


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    epochs: int = 500
    batch_size: int = 100
    lr: float = 1e-3
    target: str = 'sin2d'
    architecture: tuple[int, ...] = (2, 50, 50, 50, 50, 1)
    n_samples: int = 2000
    val_fraction: float = 0.5
    bound: float = 10.0
    rational_type: tuple[int, int] = (3, 2)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            seed=self.seed,
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.lr,
            val_fraction=self.val_fraction,
            bound=self.bound
        )


def _int_tuple(value: str) -> tuple[int, ...]:
    return tuple(int(part) for part in value.split(','))


def _rational_type(value: str) -> tuple[int, int]:
    parsed = _int_tuple(value)
    if len(parsed) != 2:
        raise ValueError('expected two comma-separated integers')
    return parsed  # type: ignore[return-value]


PARSERS: dict[str, Callable[[str], Any]] = {
    'seed': int,
    'epochs': int,
    'batch_size': int,
    'lr': float,
    'target': str,
    'architecture': _int_tuple,
    'n_samples': int,
    'val_fraction': float,
    'bound': float,
    'rational_type': _rational_type,
}


def parse_config(text: str, source: str = '<string>') -> ExperimentConfig:
    values: dict[str, Any] = {}
    seen: dict[str, int] = {}

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f'{source}:{number}: expected key=value, got {raw!r}')

        key, value = (part.strip() for part in line.split('=', 1))
        if key not in PARSERS:
            raise ConfigError(f'{source}:{number}: unknown key {key!r}')
        if key in seen:
            raise ConfigError(
                f'{source}:{number}: duplicate key {key!r} '
                f'(first set on line {seen[key]})'
            )
        try:
            values[key] = PARSERS[key](value)
        except ValueError as e:
            raise ConfigError(
                f'{source}:{number}: invalid value for {key!r}: {value!r} ({e})'
            ) from None
        seen[key] = number

    config = ExperimentConfig(**values)
    _validate(config, source)
    return apply_env(config)


def _validate(config: ExperimentConfig, source: str) -> None:
    arch = config.architecture
    if len(arch) < 2 or min(arch) < 1:
        raise ConfigError(f'{source}: architecture needs positive dims: {arch}')
    if config.n_samples < 2:
        raise ConfigError(f'{source}: n_samples must be at least 2')
    # Raises ConfigError for the remaining fields
    config.train_config()


def apply_env(config: ExperimentConfig) -> ExperimentConfig:
    override = os.environ.get(SEED_ENV)
    if override is None:
        return config
    try:
        seed = int(override)
    except ValueError:
        raise ConfigError(f'{SEED_ENV}={override!r} is not an integer') from None
    logger.info(f'Seed overridden by {SEED_ENV}: {seed}')
    return replace(config, seed=seed)


def load_config(path: str | Path) -> ExperimentConfig:
    source = Path(path)
    try:
        text = source.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f'Cannot read config {source}: {e}') from e
    config = parse_config(text, str(source))
    logger.info(f'Loaded config from {source}: {config}')
    return config
