"""
Synthetic regression targets. Inputs are returned normalised to [-1, 1]^d.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ratnet.errors import ConfigError, DomainError


@dataclass(frozen=True)
class SyntheticTarget:
    name: str
    # Physical box, one (lo, hi) pair per input dimension
    box: tuple[tuple[float, float], ...]
    function: Callable[[np.ndarray], np.ndarray]

    @property
    def dim(self) -> int:
        return len(self.box)

    def to_physical(self, inputs: np.ndarray) -> np.ndarray:
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return lo + (np.asarray(inputs, dtype=float) + 1.0) * (hi - lo) / 2.0

    def __call__(self, inputs: np.ndarray) -> np.ndarray:
        """
        Target values at normalised inputs of shape (n, dim).
        """
        return self.function(self.to_physical(inputs))


def _sin2d(p: np.ndarray) -> np.ndarray:
    x, t = p[:, 0], p[:, 1]
    return -np.sin(np.pi * x / 20.0) * np.cos(np.pi * t / 40.0)


def _tanh1d(p: np.ndarray) -> np.ndarray:
    return np.tanh(3.0 * p[:, 0])


TARGETS: dict[str, SyntheticTarget] = {
    'sin2d': SyntheticTarget('sin2d', ((-20.0, 20.0), (0.0, 40.0)), _sin2d),
    'tanh1d': SyntheticTarget('tanh1d', ((-1.0, 1.0),), _tanh1d),
}


def get_target(name: str) -> SyntheticTarget:
    try:
        return TARGETS[name]
    except KeyError:
        raise ConfigError(
            f'Unknown target {name!r}; choose from {", ".join(TARGETS)}'
        ) from None


def make_dataset(
    name: str,
    n: int,
    rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """
    n uniform samples: inputs (n, d) in [-1, 1]^d and targets (n, 1).
    """
    if n < 1:
        raise DomainError(f'Dataset needs at least one sample, got {n}')
    target = get_target(name)
    inputs = rng.uniform(-1.0, 1.0, size=(n, target.dim))
    return inputs, target(inputs).reshape(n, 1)
