"""
Zolotarev sign functions, their low-degree compositions, and the rational
ReLU and |x| approximants built from them.

The degree-k sign approximant on [-1, -ell] U [ell, 1] is

    r(x) = M x prod_j (x^2 + c_{2j}) / prod_j (x^2 + c_{2j-1})

with c_j = ell^2 sn^2(jK/k) / cn^2(jK/k) for the modulus kappa = sqrt(1 -
ell^2), and M fixed so that sign(x) - r(x) equioscillates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
import numpy.typing as npt
from numpy.polynomial import polynomial as npoly

from ratnet.approx.elliptic import EllipticModulus, complete_K, jacobi_sncndn
from ratnet.approx.ratfun import ComposedRational, RationalFunction
from ratnet.errors import DomainError, RangeError
from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)

# Largest degree (and stage count) certified in float64
MAX_DEGREE = 81
MAX_STAGES = 4

# Relative slack on the |x| error bound for float evaluation of the stages
ABS_BOUND_RTOL = 1e-6


def gap_for_stages(k: int) -> float:
    """
    ell = 4 exp(-pi sqrt(3^k / 2)), the gap used for a k-stage approximant.
    """
    return 4.0 * math.exp(-math.pi * math.sqrt(3 ** k / 2.0))


def gap_for_degree(k: int) -> float:
    """
    ell = 4 exp(-pi sqrt(k / 2)), which is also the |x| error bound up to
    ABS_BOUND_RTOL.
    """
    return 4.0 * math.exp(-math.pi * math.sqrt(k / 2.0))


# Smallest gap we accept (degree 81)
ELL_MIN = gap_for_degree(MAX_DEGREE)

# Direct expansions whose coefficients drop below this are rejected
_SMALLEST_COEFFICIENT = 1e-280


def stages_for_tolerance(epsilon: float) -> int:
    """
    ceil((ln(2/pi^2) + 2 ln ln(4/epsilon)) / ln 3), at least 1.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f'Tolerance must lie in (0, 1), got {epsilon}')
    value = (
        math.log(2.0 / math.pi ** 2) + 2.0 * math.log(math.log(4.0 / epsilon))
    ) / math.log(3.0)
    return max(1, math.ceil(value))


@dataclass(frozen=True)
class ZolotarevSpec:
    k: int
    ell: float
    kappa: float
    c: tuple[float, ...]
    M: float
    error: float


def _check_degree(k: int) -> None:
    if not isinstance(k, (int, np.integer)) or k < 1 or k % 2 == 0:
        raise DomainError(f'Zolotarev degree must be a positive odd int: {k}')
    if k > MAX_DEGREE:
        raise RangeError(
            f'Degree {k} exceeds the certified maximum {MAX_DEGREE}',
            admissible=MAX_DEGREE
        )


def _check_gap(ell: float) -> None:
    if not 0.0 < ell < 1.0:
        raise DomainError(f'Gap ell must lie in (0, 1), got {ell}')
    if ell < ELL_MIN * (1.0 - 1e-12):
        raise RangeError(
            f'Gap ell={ell!r} is below the certified minimum {ELL_MIN!r}',
            admissible=ELL_MIN
        )


def pole_constants(k: int, ell: float) -> tuple[float, ...]:
    """
    c_1..c_{k-1}.

    Arguments past K/2 are reflected (u -> K - u) so cn is never evaluated
    where it has lost its relative accuracy.
    """
    if k == 1:
        return ()

    modulus = EllipticModulus.from_complement(ell)
    K = complete_K(modulus)

    j = np.arange(1, k)
    low = 2 * j <= k
    u = np.where(low, j, k - j) * K / k
    sn, cn, _ = jacobi_sncndn(u, modulus)

    with np.errstate(divide='ignore', over='ignore'):
        c = np.where(low, (ell * sn / cn) ** 2, (cn / sn) ** 2)

    if not (np.all(np.isfinite(c)) and np.all(c > 0)
            and np.all(np.diff(c) > 0)):
        raise RangeError(
            f'Pole constants broke down for k={k}, ell={ell!r}',
            admissible=ELL_MIN
        )
    return tuple(float(v) for v in c)


def unscaled_sign(x: npt.ArrayLike, c: tuple[float, ...]) -> np.ndarray:
    """
    x prod (x^2 + c_{2j}) / (x^2 + c_{2j-1}), multiplied pairwise.
    """
    x = np.asarray(x, dtype=float)
    x2 = x * x
    rho = x.copy()
    for c_odd, c_even in zip(c[0::2], c[1::2]):
        rho = rho * ((x2 + c_even) / (x2 + c_odd))
    return rho


def _equioscillation_scaling(
    c: tuple[float, ...],
    ell: float
) -> tuple[float, float]:
    """
    M = 2 / (max rho + min rho) over [ell, 1], and the resulting level E.
    """
    grid = np.geomspace(ell, 1.0, 4001)
    rho = unscaled_sign(grid, c)
    hi, lo = float(np.max(rho)), float(np.min(rho))
    return 2.0 / (hi + lo), (hi - lo) / (hi + lo)


def build(k: int, ell: float) -> tuple[ZolotarevSpec, RationalFunction]:
    """
    Degree-k Zolotarev sign approximant on [-1, -ell] U [ell, 1].
    """
    _check_degree(k)
    _check_gap(ell)

    c = pole_constants(k, ell)
    M, error = _equioscillation_scaling(c, ell)

    numer = np.array([0.0, M])
    denom = np.array([1.0])
    for c_even in c[1::2]:
        numer = npoly.polymul(numer, [c_even, 0.0, 1.0])
    for c_odd in c[0::2]:
        denom = npoly.polymul(denom, [c_odd, 0.0, 1.0])

    coefficients = np.concatenate([numer, denom])
    nonzero = np.abs(coefficients[coefficients != 0.0])
    if not np.all(np.isfinite(coefficients)) or (
        nonzero.size and nonzero.min() < _SMALLEST_COEFFICIENT
    ):
        raise RangeError(
            f'Direct expansion of degree {k} at ell={ell!r} leaves the '
            f'float64 range; use compose_stages instead',
            admissible=ELL_MIN
        )

    spec = ZolotarevSpec(
        k=k,
        ell=ell,
        kappa=EllipticModulus.from_complement(ell).kappa,
        c=c,
        M=M,
        error=error
    )
    logger.debug(f'Built Zolotarev k={k}, ell={ell!r}: M={M!r}, E={error!r}')
    return spec, RationalFunction.from_coefficients(numer, denom)


def compose_stages(p: int, ell: float) -> ComposedRational:
    """
    p type-(3,2) stages whose composition is the degree-3^p sign approximant.

    Stage i is the degree-3 approximant for gap ell_i, rescaled by 1/r_i(1)
    so it maps [ell_i, 1] onto [ell_{i+1}, 1]; the last stage is left
    unscaled.
    """
    if not isinstance(p, (int, np.integer)) or p < 1:
        raise DomainError(f'Stage count must be a positive int, got {p}')
    if p > MAX_STAGES:
        raise RangeError(
            f'{p} stages exceed the certified maximum {MAX_STAGES}',
            admissible=MAX_STAGES
        )
    _check_gap(ell)

    stages = []
    gap = ell
    for i in range(p):
        _, stage = build(3, gap)
        if i < p - 1:
            stage = stage.scaled(1.0 / stage(1.0))
            gap = float(stage(gap))
        stages.append(stage)

    return ComposedRational(tuple(stages))


@dataclass(frozen=True)
class ReluApproximant:
    """
    R(x) = (x r(x) / (1 + epsilon) + x) / 2 for a composed sign approximant r.
    """
    epsilon: float
    ell: float
    sign: ComposedRational

    @property
    def stages(self) -> int:
        return len(self.sign)

    def degree(self) -> int:
        return self.sign.degree() + 1

    def param_count(self) -> int:
        return self.sign.param_count()

    def node_count(self) -> int:
        # Sign stages plus the product gadget forming x * r(x)
        return self.stages + 3

    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        xa = np.asarray(x, dtype=float)
        r = np.asarray(self.sign(xa), dtype=float)
        values = 0.5 * (xa * r / (1.0 + self.epsilon) + xa)
        return values.item() if np.ndim(x) == 0 else values


def relu_approximant(epsilon: float) -> ReluApproximant:
    """
    Rational approximant to ReLU on [-1, 1] with sup error at most epsilon.
    """
    k = stages_for_tolerance(epsilon)
    if k > MAX_STAGES:
        raise RangeError(
            f'Tolerance {epsilon!r} needs {k} stages; the smallest '
            f'admissible tolerance is {ELL_MIN!r}',
            admissible=ELL_MIN
        )

    ell = gap_for_stages(k)
    approximant = ReluApproximant(epsilon, ell, compose_stages(k, ell))
    logger.info(
        f'ReLU approximant for epsilon={epsilon!r}: {k} stage(s), '
        f'ell={ell!r}, {approximant.param_count()} parameters'
    )
    return approximant


@dataclass(frozen=True)
class AbsApproximant:
    """
    x -> x r(x), an approximant to |x| on [-1, 1] with error at most `bound`:
    the gap ell = 4 exp(-pi sqrt(k / 2)) widened by ABS_BOUND_RTOL. At k = 81
    the measured error exceeds ell itself by about one part in 1e9.
    """
    k: int
    ell: float
    sign: Union[RationalFunction, ComposedRational]

    @property
    def bound(self) -> float:
        return self.ell * (1.0 + ABS_BOUND_RTOL)

    def param_count(self) -> int:
        return self.sign.param_count()

    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        xa = np.asarray(x, dtype=float)
        values = xa * np.asarray(self.sign(xa), dtype=float)
        return values.item() if np.ndim(x) == 0 else values


def _power_of_three(k: int) -> int:
    p = 0
    while k % 3 == 0:
        k //= 3
        p += 1
    return p if k == 1 else 0


def abs_approximant(k: int) -> AbsApproximant:
    _check_degree(k)
    ell = gap_for_degree(k)

    p = _power_of_three(k)
    sign: Union[RationalFunction, ComposedRational]
    if p >= 2:
        sign = compose_stages(p, ell)
    else:
        _, sign = build(k, ell)
    return AbsApproximant(k, ell, sign)
