"""
Rational networks for smooth functions on [0, 1]^d: a partition of unity of
piecewise linear bumps times local Taylor polynomials.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
import numpy.typing as npt

from ratnet.approx.zolotarev import relu_approximant
from ratnet.constructive.builders import (
    PiecewiseLinear, monomial_network, piecewise_network
)
from ratnet.constructive.network import (
    IDENTITY, Layer, RationalNetwork, affine_network, lift, postcompose,
    precompose, product_tree, stack, then
)
from ratnet.errors import DomainError
from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)

# Derivative oracle: (multi-index, point) -> D^alpha f(point)
Derivatives = Callable[[tuple[int, ...], tuple[float, ...]], float]

MAX_DIM = 2
MAX_ORDER = 4


def grid_size(d: int, n: int, epsilon: float) -> int:
    """
    N = ceil((n! / (2^d d^n) * epsilon / 2)^(-1/n)).
    """
    base = math.factorial(n) / (2 ** d * d ** n) * epsilon / 2.0
    return math.ceil(base ** (-1.0 / n))


def bump(x: npt.ArrayLike, m: int, N: int) -> np.ndarray:
    """
    psi_m: 1 within 1/(3N) of m/N, 0 beyond 2/(3N), linear in between.
    """
    distance = np.abs(np.asarray(x, dtype=float) - m / N)
    return np.clip(2.0 - 3.0 * N * distance, 0.0, 1.0)


def partition_of_unity(x: npt.ArrayLike, N: int) -> np.ndarray:
    """
    sum_m psi_m(x); identically 1 on [0, 1].
    """
    return sum(bump(x, m, N) for m in range(N + 1))


def bump_function(m: int, N: int) -> PiecewiseLinear:
    centre = m / N
    offsets = np.array([-2.0, -1.0, 1.0, 2.0]) / (3 * N)
    knots = np.unique(np.concatenate([
        [0.0, 1.0], np.clip(centre + offsets, 0.0, 1.0)
    ]))
    return PiecewiseLinear.from_knots(knots, bump(knots, m, N))


def clip_network(delta: float) -> RationalNetwork:
    """
    y -> y - s R((y - 1) / s) with s = 1 + delta, close to min(y, 1).
    """
    s = 1.0 + delta
    approximant = relu_approximant(delta)
    layer = Layer(
        np.array([[1.0], [1.0 / s]]),
        np.array([0.0, -1.0 / s]),
        (IDENTITY, approximant)
    )
    return RationalNetwork(1, (layer,), np.array([[1.0, -s]]), [0.0])


def multi_indices(d: int, n: int) -> list[tuple[int, ...]]:
    """
    All alpha with |alpha| < n, graded.
    """
    indices = [
        alpha for alpha in itertools.product(range(n), repeat=d)
        if sum(alpha) < n
    ]
    return sorted(indices, key=lambda alpha: (sum(alpha), alpha[::-1]))


@lru_cache(maxsize=None)
def _shifted_monomial(power: int, shift: float) -> RationalNetwork:
    # x -> (x - shift)^power
    return precompose(monomial_network(power), [[1.0]], [-shift])


@dataclass(frozen=True)
class TaylorPlan:
    d: int
    n: int
    epsilon: float
    N: int
    delta: float
    clip_delta: float | None

    @classmethod
    def create(cls, d: int, n: int, epsilon: float) -> TaylorPlan:
        if d not in (1, 2):
            raise DomainError(f'Dimension must be 1 or {MAX_DIM}, got {d}')
        if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_ORDER:
            raise DomainError(f'Order must be an int in [1, {MAX_ORDER}]: {n}')
        if not 0.0 < epsilon < 1.0:
            raise DomainError(f'Tolerance must lie in (0, 1), got {epsilon}')

        N = grid_size(d, n, epsilon)
        delta = epsilon / (2 ** (d + 1) * d ** (n + 1))
        clip_delta = delta / (N + 1) ** d if d > 1 else None
        return cls(d, n, epsilon, N, delta, clip_delta)


def taylor_network(
    derivatives: Derivatives,
    d: int,
    n: int,
    epsilon: float
) -> RationalNetwork:
    """
    Network within epsilon of f on [0, 1]^d, for f with all partial
    derivatives of order up to n bounded by 1.
    """
    plan = TaylorPlan.create(d, n, epsilon)
    N = plan.N
    logger.info(
        f'Taylor network d={d} n={n} epsilon={epsilon!r}: N={N}, '
        f'delta={plan.delta!r}'
    )

    bumps = []
    for m in range(N + 1):
        net = piecewise_network(bump_function(m, N), plan.delta)
        if plan.clip_delta is not None:
            net = then(net, clip_network(plan.clip_delta))
        bumps.append(net)

    alphas = multi_indices(d, n)
    terms, coefficients = [], []
    for point in itertools.product(range(N + 1), repeat=d):
        centre = tuple(m / N for m in point)
        for alpha in alphas:
            value = derivatives(alpha, centre) / math.prod(
                math.factorial(a) for a in alpha
            )
            if value == 0.0:
                continue
            factors = [lift(bumps[m], k, d) for k, m in enumerate(point)]
            factors.extend(
                lift(_shifted_monomial(a, centre[k]), k, d)
                for k, a in enumerate(alpha) if a
            )
            terms.append(
                factors[0] if len(factors) == 1
                else product_tree(stack(factors))
            )
            coefficients.append(value)

    if not terms:
        return affine_network(np.zeros((1, d)), [0.0])

    net = postcompose(stack(terms), np.array([coefficients]), [0.0])
    logger.info(
        f'Taylor network: {len(terms)} terms, size {net.size()}, '
        f'depth {net.depth()}'
    )
    return net


# -----------------------------------------------------------------------------
# Reference targets
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothTarget:
    d: int
    function: Callable[[np.ndarray], np.ndarray]
    derivatives: Derivatives


def _exp_derivatives(alpha: tuple[int, ...], point: tuple[float, ...]) -> float:
    return math.exp(point[0] - 1.0)


def _linear_derivatives(alpha: tuple[int, ...], point: tuple[float, ...]) -> float:
    match alpha[0]:
        case 0:
            return point[0]
        case 1:
            return 1.0
        case _:
            return 0.0


def _product_derivatives(
    alpha: tuple[int, ...],
    point: tuple[float, ...]
) -> float:
    # f(x, y) = xy / 2 keeps every derivative within [0, 1/2]
    if alpha[0] > 1 or alpha[1] > 1:
        return 0.0
    x = point[0] if alpha[0] == 0 else 1.0
    y = point[1] if alpha[1] == 0 else 1.0
    return 0.5 * x * y


TARGETS: dict[str, SmoothTarget] = {
    'exp': SmoothTarget(
        1, lambda x: np.exp(x[:, 0] - 1.0), _exp_derivatives
    ),
    'linear': SmoothTarget(1, lambda x: x[:, 0], _linear_derivatives),
    'product': SmoothTarget(
        2, lambda x: 0.5 * x[:, 0] * x[:, 1], _product_derivatives
    ),
}
