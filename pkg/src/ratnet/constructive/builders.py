"""
Explicit rational networks: the exact product gadget, monomials, piecewise
linear functions and the ReLU-to-rational conversion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
import numpy.typing as npt

from ratnet.approx.ratfun import relu
from ratnet.approx.zolotarev import relu_approximant
from ratnet.constructive.network import (
    IDENTITY, RELU, SQUARE, Layer, RationalNetwork, Relu, affine_network,
    iter_activations, power, product_tree, replace_activations, stack
)
from ratnet.errors import DomainError, PreconditionError
from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)

# Slack on the ||a||_1 + |b| <= 1 hypothesis
NORM_SLACK = 1e-12

# Largest per-hinge tolerance handed to relu_approximant
MAX_HINGE_TOLERANCE = 0.5

# Largest power gap between the two factors of one monomial product gadget
MAX_IMBALANCE = 12


def product_gadget() -> RationalNetwork:
    """
    (x, y) -> ((x)^2 + (y)^2 - (x - y)^2) / 2 = xy, exactly, with three
    square nodes.
    """
    layer = Layer(
        np.array([[1.0, 0.0], [0.0, 1.0], [1.0, -1.0]]),
        np.zeros(3),
        (SQUARE,) * 3
    )
    return RationalNetwork(2, (layer,), np.array([[0.5, 0.5, -0.5]]), [0.0])


# -----------------------------------------------------------------------------
# Monomials
# -----------------------------------------------------------------------------

def _digits(n: int, base: int) -> list[int]:
    digits = []
    while n:
        n, d = divmod(n, base)
        digits.append(d)
    return digits


def _floor_log(n: int, base: int) -> int:
    return len(_digits(n, base)) - 1


def monomial_size_bound(n: int, r_p: int) -> int:
    """
    5 floor(log_{r_p} n)^2 + 1 nodes.
    """
    return 5 * _floor_log(n, r_p) ** 2 + 1


def monomial_radius(n: int) -> float:
    """
    Largest |x| at which every square inside monomial_network(n, .) stays
    finite. Beyond it evaluation raises EvaluationError.

    Accuracy is certified for samples spanning |x| <= R with 1/2 <= R <= 2:
    the error measured against max |x|^n over the samples stays below
    n * 2^MAX_IMBALANCE * eps.
    """
    if n < 1:
        raise DomainError(f'Monomial degree must be positive, got {n}')
    # Squares peak at 4 |x|^(n + MAX_IMBALANCE + 1)
    exponent = n + MAX_IMBALANCE + 1
    return float((np.finfo(float).max / 4.0) ** (1.0 / exponent))


def _power_chain(base: int, level: int, digit: int) -> RationalNetwork:
    # x -> (x^(base^level))^digit, one node per exponentiation
    exponents = [base] * level + ([digit] if digit > 1 else [])
    layers = tuple(
        Layer(np.ones((1, 1)), np.zeros(1), (power(c),)) for c in exponents
    )
    return RationalNetwork(1, layers, np.ones((1, 1)), np.zeros(1))


def _imbalance(powers: Sequence[int]) -> int:
    # Largest power gap seen by a gadget when multiplying left to right
    worst, acc = 0, powers[0]
    for p in powers[1:]:
        worst = max(worst, abs(p - acc))
        acc += p
    return worst


def _gadget_layer(u: np.ndarray, v: np.ndarray) -> Layer:
    # Squares of u, v and u - v; uv = (u^2 + v^2 - (u - v)^2) / 2
    return Layer(np.stack([u, v, u - v]), np.zeros(3), (SQUARE,) * 3)


def _binary_ladder(n: int) -> RationalNetwork:
    """
    x^n from the pair (x^j, x^(j+1)), doubling j (plus the next bit of n)
    per layer with three square nodes. Every gadget multiplies factors whose
    powers differ by one.
    """
    bits = [int(b) for b in bin(n)[3:]]
    layers = [Layer(np.ones((2, 1)), np.zeros(2), (IDENTITY, SQUARE))]
    # Rows of `pair` read (x^j, x^(j+1)) off the previous layer's outputs
    pair = np.eye(2)
    half = [0.5, 0.5, -0.5]
    for bit in bits[:-1]:
        u, v = pair
        layers.append(_gadget_layer(u, v))
        # Bit 1 moves to (uv, v^2), bit 0 to (u^2, uv)
        pair = np.array(
            [half, [0.0, 1.0, 0.0]] if bit else [[1.0, 0.0, 0.0], half]
        )

    u, v = pair
    if bits[-1]:
        layers.append(_gadget_layer(u, v))
        return RationalNetwork(1, tuple(layers), np.array([half]), np.zeros(1))
    layers.append(Layer(u[None, :], np.zeros(1), (SQUARE,)))
    return RationalNetwork(1, tuple(layers), np.ones((1, 1)), np.zeros(1))


def monomial_network(n: int, r_p: int = 3) -> RationalNetwork:
    """
    Exact network for x -> x^n built from x^{r_p}, x^c and square nodes.

    n is written in base r_p; digit c at position l contributes the chain
    (x^{r_p^l})^c, and the chains are multiplied with product gadgets,
    smallest power first. A gadget multiplying x^a by x^b loses about
    |x|^|a - b| eps to cancellation, so when some product would pair powers
    more than MAX_IMBALANCE apart the network instead climbs the binary
    digits of n (_binary_ladder), which stays within the same size bound.
    See monomial_radius for the certified range of x.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f'Monomial degree must be a positive int, got {n}')
    if not isinstance(r_p, (int, np.integer)) or r_p < 2:
        raise DomainError(f'Power base must be an int >= 2, got {r_p}')

    terms = [
        (level, digit) for level, digit in enumerate(_digits(n, r_p)) if digit
    ]
    powers = [digit * r_p ** level for level, digit in terms]
    if _imbalance(powers) > MAX_IMBALANCE:
        net = _binary_ladder(int(n))
    else:
        net = _power_chain(r_p, *terms[0])
        for level, digit in terms[1:]:
            net = product_tree(stack([net, _power_chain(r_p, level, digit)]))
    logger.debug(
        f'Monomial x^{n} (base {r_p}): size {net.size()}, depth {net.depth()}'
    )
    return net


# -----------------------------------------------------------------------------
# Piecewise linear functions on [0, 1]
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseLinear:
    """
    g(x) = c_0 ReLU(b_1 - x) + sum_j c_j ReLU(x - b_j) + c_{m+1} on [0, 1]
    with breakpoints 0 <= b_1 < ... < b_m <= 1.
    """
    breakpoints: tuple[float, ...]
    coefficients: tuple[float, ...]
    lipschitz: float

    def __post_init__(self) -> None:
        b = tuple(float(v) for v in self.breakpoints)
        c = tuple(float(v) for v in self.coefficients)
        object.__setattr__(self, 'breakpoints', b)
        object.__setattr__(self, 'coefficients', c)

        if not b:
            raise DomainError('A piecewise linear function needs a breakpoint')
        if len(c) != len(b) + 2:
            raise DomainError(
                f'{len(b)} breakpoints need {len(b) + 2} coefficients, '
                f'got {len(c)}'
            )
        if b[0] < 0.0 or b[-1] > 1.0 or any(
            lo >= hi for lo, hi in zip(b, b[1:])
        ):
            raise DomainError(
                f'Breakpoints must increase strictly within [0, 1]: {b}'
            )

        limit = self.lipschitz * (1.0 + NORM_SLACK)
        if abs(c[0]) > limit or sum(abs(v) for v in c[1:-1]) > limit:
            raise DomainError(
                f'Coefficients exceed the Lipschitz constant {self.lipschitz}'
            )

    @classmethod
    def from_knots(
        cls,
        xs: Sequence[float],
        ys: Sequence[float]
    ) -> PiecewiseLinear:
        """
        Interpolant through (xs, ys), xs strictly increasing from 0 to 1.
        """
        x = np.asarray(xs, dtype=float)
        y = np.asarray(ys, dtype=float)
        if x.shape != y.shape or x.size < 2:
            raise DomainError('Need at least two knots with matching values')
        if x[0] != 0.0 or x[-1] != 1.0 or np.any(np.diff(x) <= 0):
            raise DomainError('Knots must increase strictly from 0 to 1')

        slopes = np.diff(y) / np.diff(x)
        if x.size == 2:
            breakpoints = (0.0,)
            coefficients = [0.0, slopes[0], y[0]]
        else:
            breakpoints = tuple(x[1:-1])
            hinges = np.concatenate([[slopes[1]], np.diff(slopes[1:])])
            coefficients = [-slopes[0], *hinges, y[1]]

        lipschitz = max(
            float(np.max(np.abs(slopes))),
            abs(coefficients[0]),
            float(np.sum(np.abs(coefficients[1:-1])))
        )
        return cls(breakpoints, tuple(coefficients), lipschitz)

    @property
    def constant(self) -> float:
        return self.coefficients[-1]

    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        xa = np.asarray(x, dtype=float)
        c, b = self.coefficients, self.breakpoints
        values = c[0] * relu(b[0] - xa) + c[-1]
        for cj, bj in zip(c[1:-1], b):
            values = values + cj * relu(xa - bj)
        return values


def _hinges(g: PiecewiseLinear) -> list[tuple[float, float, float]]:
    # (input weight, bias, output coefficient) per nonzero ReLU term
    c, b = g.coefficients, g.breakpoints
    hinges = [(-1.0, b[0], c[0])] if c[0] else []
    hinges.extend((1.0, -bj, cj) for cj, bj in zip(c[1:-1], b) if cj)
    return hinges


def piecewise_network(g: PiecewiseLinear, epsilon: float) -> RationalNetwork:
    """
    One-hidden-layer rational network within epsilon of g on [0, 1].
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f'Tolerance must lie in (0, 1), got {epsilon}')

    hinges = _hinges(g)
    if not hinges:
        return affine_network(np.zeros((1, 1)), [g.constant])

    tolerance = min(epsilon / (2.0 * g.lipschitz), MAX_HINGE_TOLERANCE)
    activation = relu_approximant(tolerance)
    weights, biases, outputs = (np.array(v) for v in zip(*hinges))
    layer = Layer(
        weights.reshape(-1, 1), biases, (activation,) * len(hinges)
    )
    return RationalNetwork(1, (layer,), outputs.reshape(1, -1), [g.constant])


# -----------------------------------------------------------------------------
# ReLU networks to rational networks
# -----------------------------------------------------------------------------

Schedule = Literal['flat', 'geometric']


def budget_schedule(
    epsilon: float,
    layers: int,
    schedule: Schedule = 'flat',
    lipschitz: float = 1.0
) -> list[float]:
    """
    Per-layer tolerances summing (after Lipschitz amplification) to epsilon.
    """
    if layers < 1:
        raise DomainError(f'Need at least one ReLU layer, got {layers}')
    match schedule:
        case 'flat':
            return [epsilon / layers] * layers
        case 'geometric':
            if lipschitz <= 0:
                raise DomainError('Lipschitz constant must be positive')
            return [
                epsilon * lipschitz ** (j - layers) / layers
                for j in range(1, layers + 1)
            ]
        case _:
            raise DomainError(f'Unknown schedule {schedule!r}')


def norm_offenders(f: RationalNetwork) -> list[tuple[int, int, float]]:
    """
    (layer, node, ||a||_1 + |b|) for every node breaking the unit bound;
    the output map is reported as layer len(f.layers).
    """
    maps = [(layer.weight, layer.bias) for layer in f.layers]
    maps.append((f.output_weight, f.output_bias))

    offenders = []
    for index, (weight, bias) in enumerate(maps):
        norms = np.asarray(abs(weight).sum(axis=1)).ravel() + np.abs(bias)
        for node in np.flatnonzero(norms > 1.0 + NORM_SLACK):
            offenders.append((index, int(node), float(norms[node])))
    return offenders


def ratify_relu_network(
    f: RationalNetwork,
    epsilon: float,
    schedule: Schedule = 'flat',
    lipschitz: float = 1.0
) -> RationalNetwork:
    """
    Replace every ReLU of `f` by a rational approximant so that the result
    stays within epsilon of `f` on [-1, 1]^d.

    Every node must satisfy ||a||_1 + |b| <= 1; otherwise PreconditionError
    lists the offenders.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f'Tolerance must lie in (0, 1), got {epsilon}')
    if not f.layers:
        raise DomainError('Network has no ReLU layers')
    if not all(isinstance(a, Relu) for a in iter_activations(f)):
        raise DomainError('Only pure ReLU networks can be converted')

    offenders = norm_offenders(f)
    if offenders:
        listing = ', '.join(
            f'layer {layer} node {node} ({norm:.6g})'
            for layer, node, norm in offenders
        )
        raise PreconditionError(
            f'{len(offenders)} node(s) violate ||a||_1 + |b| <= 1: {listing}',
            offenders=offenders
        )

    budgets = budget_schedule(epsilon, f.depth(), schedule, lipschitz)
    approximants = [relu_approximant(budget) for budget in budgets]
    net = replace_activations(f, lambda index, _: approximants[index])

    logger.info(
        f'Converted ReLU network ({f.depth()} layers, {f.size()} nodes) '
        f'at epsilon={epsilon!r}: {net.size()} rational nodes'
    )
    return net


def relu_reference(f: RationalNetwork) -> RationalNetwork:
    """
    `f` with every activation forced to the exact ReLU.
    """
    return replace_activations(f, lambda index, _: RELU)


def random_piecewise(
    m: int,
    lipschitz: float,
    rng: np.random.Generator
) -> PiecewiseLinear:
    """
    Random g with m breakpoints whose hinge coefficients use the full
    Lipschitz budget: sum_j |c_j| = lipschitz.
    """
    if m < 1:
        raise DomainError(f'Need at least one breakpoint, got {m}')
    breakpoints = np.sort(rng.uniform(0.0, 1.0, size=m))
    hinges = rng.standard_normal(m)
    hinges *= lipschitz / np.sum(np.abs(hinges))
    c0 = rng.uniform(-lipschitz, lipschitz)
    constant = rng.uniform(-1.0, 1.0)
    return PiecewiseLinear(
        tuple(breakpoints), (c0, *hinges, constant), lipschitz
    )
