"""
Trainable activations for dense networks. One `ActivationSpec` is shared by
every node of a layer, so coefficient gradients accumulate over the layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional

import numpy as np
import numpy.typing as npt

from ratnet.approx.classic import RELU_INIT_TABLE, best_poly_relu, minimax_rational
from ratnet.approx.ratfun import Interval, denominator_ok, horner, relu
from ratnet.errors import DomainError
from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)

# Pole screening grid used during training
TRAIN_POLE_GRID = 2_001

POLYNOMIAL_DEGREE = 3


class ActivationKind(Enum):
    """
    Activation families for dense networks.

    Rational and polynomial activations carry trainable coefficients. ReLU
    and sinusoid are fixed.

    RATIONAL:
        P(z)/Q(z) with coefficients initialized near ReLU. Type (3, 2) uses
        the tabulated coefficients, other types a minimax fit.

    RELU:
        max(z, 0).

    SINUSOID:
        sin(z).

    POLYNOMIAL:
        Degree-3 polynomial initialized to the best cubic approximation of
        ReLU on [-1, 1].
    """
    RATIONAL = 'rational'
    RELU = 'relu'
    SINUSOID = 'sinusoid'
    POLYNOMIAL = 'polynomial'


@lru_cache(maxsize=None)
def _rational_init(type_: tuple[int, int]) -> tuple[float, ...]:
    if type_ == (3, 2):
        return RELU_INIT_TABLE.numer + RELU_INIT_TABLE.denom
    rational = minimax_rational(relu, type_).rational
    numer = rational.numer + (0.0,) * (type_[0] + 1 - len(rational.numer))
    denom = rational.denom + (0.0,) * (type_[1] + 1 - len(rational.denom))
    return numer + denom


@lru_cache(maxsize=None)
def _polynomial_init(degree: int) -> tuple[float, ...]:
    return tuple(float(c) for c in best_poly_relu(degree).power_coefficients())


@dataclass
class ActivationSpec:
    kind: ActivationKind
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rational_type: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        self.kind = ActivationKind(self.kind)
        self.params = np.array(self.params, dtype=float).ravel()

        match self.kind:
            case ActivationKind.RATIONAL:
                if self.rational_type is None:
                    raise DomainError('Rational activation needs a type')
                r_p, r_q = self.rational_type
                expected = r_p + r_q + 2
            case ActivationKind.POLYNOMIAL:
                expected = max(self.params.size, 1)
            case _:
                expected = 0
        if self.params.size != expected:
            raise DomainError(
                f'{self.kind.value} activation needs {expected} parameters, '
                f'got {self.params.size}'
            )

    @classmethod
    def rational(cls, type_: tuple[int, int] = (3, 2)) -> ActivationSpec:
        return cls(ActivationKind.RATIONAL, np.array(_rational_init(type_)),
                   tuple(type_))

    @classmethod
    def polynomial(cls, degree: int = POLYNOMIAL_DEGREE) -> ActivationSpec:
        return cls(ActivationKind.POLYNOMIAL,
                   np.array(_polynomial_init(degree)))

    @classmethod
    def create(
        cls,
        kind: ActivationKind | str,
        rational_type: tuple[int, int] = (3, 2)
    ) -> ActivationSpec:
        match ActivationKind(kind):
            case ActivationKind.RATIONAL:
                return cls.rational(rational_type)
            case ActivationKind.POLYNOMIAL:
                return cls.polynomial()
            case other:
                return cls(other)

    def copy(self) -> ActivationSpec:
        return ActivationSpec(self.kind, self.params.copy(), self.rational_type)

    def param_count(self) -> int:
        return self.params.size

    @property
    def numer(self) -> np.ndarray:
        if self.kind is ActivationKind.RATIONAL:
            return self.params[:self.rational_type[0] + 1]
        return self.params

    @property
    def denom(self) -> np.ndarray:
        if self.kind is ActivationKind.RATIONAL:
            return self.params[self.rational_type[0] + 1:]
        return np.ones(1)

    def poles_ok(self, bound: float, n_grid: int = TRAIN_POLE_GRID) -> bool:
        if self.kind is not ActivationKind.RATIONAL:
            return True
        return denominator_ok(self.denom, Interval(-bound, bound), n_grid)

    # -------------------------------------------------------------------------
    # Evaluation and derivatives
    # -------------------------------------------------------------------------

    def __call__(self, z: npt.ArrayLike) -> np.ndarray:
        za = np.asarray(z, dtype=float)
        match self.kind:
            case ActivationKind.RATIONAL:
                with np.errstate(divide='ignore', invalid='ignore',
                                 over='ignore'):
                    return horner(self.numer, za) / horner(self.denom, za)
            case ActivationKind.POLYNOMIAL:
                return horner(self.params, za)
            case ActivationKind.RELU:
                return relu(za)
            case ActivationKind.SINUSOID:
                return np.sin(za)

    def derivative(self, z: npt.ArrayLike) -> np.ndarray:
        za = np.asarray(z, dtype=float)
        match self.kind:
            case ActivationKind.RATIONAL:
                p, q = horner(self.numer, za), horner(self.denom, za)
                dp = _derivative_values(self.numer, za)
                dq = _derivative_values(self.denom, za)
                with np.errstate(divide='ignore', invalid='ignore',
                                 over='ignore'):
                    return (dp * q - p * dq) / (q * q)
            case ActivationKind.POLYNOMIAL:
                return _derivative_values(self.params, za)
            case ActivationKind.RELU:
                return (za > 0).astype(float)
            case ActivationKind.SINUSOID:
                return np.cos(za)

    def param_gradient(
        self,
        z: np.ndarray,
        upstream: np.ndarray,
        per_node: bool = False
    ) -> np.ndarray:
        """
        Gradient of sum(upstream * self(z)) with respect to `params`.

        z and upstream have shape (batch, width). The shared gradient sums
        over batch and nodes; with per_node=True the node axis is kept and
        the result has shape (width, param_count).
        """
        if self.param_count() == 0:
            shape = (z.shape[1], 0) if per_node else (0,)
            return np.zeros(shape)

        match self.kind:
            case ActivationKind.RATIONAL:
                r_p, r_q = self.rational_type
                p, q = horner(self.numer, z), horner(self.denom, z)
                with np.errstate(divide='ignore', invalid='ignore',
                                 over='ignore'):
                    d_numer = upstream / q
                    d_denom = -upstream * p / (q * q)
                blocks = [d_numer[..., None] * _powers(z, r_p),
                          d_denom[..., None] * _powers(z, r_q)]
                local = np.concatenate(blocks, axis=-1)
            case ActivationKind.POLYNOMIAL:
                degree = self.params.size - 1
                local = upstream[..., None] * _powers(z, degree)

        if per_node:
            return local.sum(axis=0)
        return local.sum(axis=(0, 1))


def _powers(z: np.ndarray, degree: int) -> np.ndarray:
    # z[..., None] ** [0, 1, ..., degree]
    out = np.empty(z.shape + (degree + 1,))
    out[..., 0] = 1.0
    for i in range(1, degree + 1):
        out[..., i] = out[..., i - 1] * z
    return out


def _derivative_values(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    if coeffs.size < 2:
        return np.zeros_like(z)
    return horner(np.arange(1, coeffs.size) * coeffs[1:], z)
