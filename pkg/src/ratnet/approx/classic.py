"""
Baseline approximants to ReLU: Newman rationals, best polynomials (Remez
exchange) and a small-type rational minimax solver, plus the convergence
table comparing them with the composed Zolotarev approximant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np
import numpy.typing as npt
import pandas as pd
from numpy.polynomial import Polynomial
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import linprog

from ratnet.approx.ratfun import (
    DEFAULT_GRID, UNIT, Interval, RationalFunction, RealFunction,
    chebyshev_grid, evaluate_on, pole_check, relu, sup_error
)
from ratnet.approx.zolotarev import (
    MAX_STAGES, ReluApproximant, compose_stages, gap_for_stages
)
from ratnet.errors import DomainError, NumericError, RangeError
from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)

# Working grids
BEST_POLY_GRID = 10_001
MINIMAX_GRID = 2_001

# Newman products overflow the useful range beyond this
NEWMAN_MAX = 400

# Type-(3,2) ReLU initialization, ascending order
RELU_INIT_TABLE = RationalFunction(
    numer=(0.0218, 0.5, 1.5957, 1.1915),
    denom=(1.0, 0.0, 2.383)
)


@lru_cache(maxsize=1)  # Cache so the dense sweep runs only once
def init_error() -> float:
    """
    Sup error of RELU_INIT_TABLE against ReLU on [-1, 1] (10^5 points).
    """
    return sup_error(relu, RELU_INIT_TABLE, UNIT, DEFAULT_GRID).max_abs_error


def _to_unit(x: np.ndarray, interval: Interval) -> np.ndarray:
    if interval == UNIT:
        return x
    return (2.0 * x - interval.lo - interval.hi) / interval.width


# -----------------------------------------------------------------------------
# Newman
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class NewmanRelu:
    """
    (r_abs(x) + x) / 2 with r_abs(x) = x (p(x) - p(-x)) / (p(x) + p(-x)),
    p(x) = prod_{i<N} (x + xi^i) and xi = exp(-1/sqrt(N)).
    """
    N: int

    @property
    def xi(self) -> float:
        return math.exp(-1.0 / math.sqrt(self.N))

    def param_count(self) -> int:
        return 2 * self.N + 3

    def abs_part(self, x: npt.ArrayLike) -> np.ndarray:
        # r_abs is even, and at |x| the ratio p(-|x|)/p(|x|) stays in [-1, 1]
        ax = np.abs(np.asarray(x, dtype=float))
        q = np.ones_like(ax)
        for node in self.xi ** np.arange(self.N):
            q = q * ((node - ax) / (node + ax))
        return ax * (1.0 - q) / (1.0 + q)

    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        xa = np.asarray(x, dtype=float)
        values = 0.5 * (self.abs_part(xa) + xa)
        return values.item() if np.ndim(x) == 0 else values


def newman_relu(N: int) -> NewmanRelu:
    if N < 4:
        raise DomainError(f'Newman construction needs N >= 4, got {N}')
    if N > NEWMAN_MAX:
        raise RangeError(
            f'Newman construction overflows beyond N={NEWMAN_MAX}',
            admissible=NEWMAN_MAX
        )
    return NewmanRelu(N)


# -----------------------------------------------------------------------------
# Best polynomial (Remez exchange)
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class BestPolynomial:
    """
    Minimax polynomial, stored as Chebyshev coefficients on `interval`.
    """
    coefficients: tuple[float, ...]
    interval: Interval
    error: float
    level: float
    reference: tuple[float, ...]
    iterations: int

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def param_count(self) -> int:
        return self.degree + 1

    def power_coefficients(self) -> np.ndarray:
        """
        Ascending power-basis coefficients in x.
        """
        in_t = Polynomial(cheb.cheb2poly(self.coefficients))
        if self.interval == UNIT:
            return in_t.coef
        lo, hi = self.interval.lo, self.interval.hi
        t_of_x = Polynomial([-(lo + hi) / (hi - lo), 2.0 / (hi - lo)])
        return in_t(t_of_x).coef

    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        xa = np.asarray(x, dtype=float)
        values = cheb.chebval(_to_unit(xa, self.interval), self.coefficients)
        return values.item() if np.ndim(x) == 0 else np.asarray(values)


def alternating_extrema(err: np.ndarray) -> np.ndarray:
    """
    Index of the largest |err| within each run of constant sign.
    """
    nonzero = np.flatnonzero(err != 0.0)
    if nonzero.size == 0:
        return nonzero
    breaks = np.flatnonzero(np.diff(np.sign(err[nonzero]))) + 1
    runs = np.split(nonzero, breaks)
    return np.array([run[np.argmax(np.abs(err[run]))] for run in runs])


def _single_exchange(err: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """
    Classic one-point exchange: swap the global extremum into the reference
    while keeping signs alternating.
    """
    k = int(np.argmax(np.abs(err)))
    if k in ref:
        return ref

    ref = ref.copy()
    same = lambda i: np.sign(err[k]) == np.sign(err[ref[i]])  # noqa: E731
    pos = int(np.searchsorted(ref, k))
    if pos == 0:
        if same(0):
            ref[0] = k
        else:
            ref = np.concatenate([[k], ref[:-1]])
    elif pos == len(ref):
        if same(-1):
            ref[-1] = k
        else:
            ref = np.concatenate([ref[1:], [k]])
    elif same(pos - 1):
        ref[pos - 1] = k
    else:
        ref[pos] = k
    return ref


def exchange_reference(
    err: np.ndarray,
    ref: np.ndarray,
    n_ref: int
) -> np.ndarray:
    """
    New reference of `n_ref` alternating extrema of `err`.

    Surplus extrema are pruned from the smallest end or as adjacent pairs so
    alternation is preserved; with too few alternations fall back to a
    single-point exchange.
    """
    ext = list(alternating_extrema(err))
    if len(ext) < n_ref:
        logger.debug(
            f'Only {len(ext)} alternations for {n_ref} reference points; '
            f'falling back to single exchange'
        )
        return _single_exchange(err, ref)

    while len(ext) > n_ref:
        values = np.abs(err[ext])
        j = int(np.argmin(values))
        if len(ext) - n_ref == 1 or j in (0, len(ext) - 1):
            ext.pop(0 if values[0] < values[-1] else -1)
        else:
            neighbour = j - 1 if values[j - 1] < values[j + 1] else j + 1
            for index in sorted((j, neighbour), reverse=True):
                ext.pop(index)

    new_ref = np.array(ext)
    if int(np.argmax(np.abs(err))) not in new_ref:
        return _single_exchange(err, ref)
    return new_ref


def best_polynomial(
    f: RealFunction,
    degree: int,
    interval: Interval = UNIT,
    n_grid: int = BEST_POLY_GRID,
    tol: float = 1e-10,
    max_iter: int = 100
) -> BestPolynomial:
    """
    Minimax polynomial of `degree` for f on a discrete Chebyshev grid.
    """
    if degree < 0:
        raise DomainError(f'Degree must be nonnegative, got {degree}')
    n_ref = degree + 2
    if n_grid < 2 * n_ref:
        raise DomainError(f'Grid of {n_grid} points too coarse for {degree=}')

    x = chebyshev_grid(interval, n_grid)
    t = _to_unit(x, interval)
    fx = evaluate_on(f, x)

    # Start from the extrema of T_{degree+1}
    targets = -np.cos(np.pi * np.arange(n_ref) / (n_ref - 1))
    ref = np.unique(np.searchsorted(t, targets).clip(0, n_grid - 1))
    if ref.size < n_ref:
        ref = np.linspace(0, n_grid - 1, n_ref).round().astype(int)

    signs = (-1.0) ** np.arange(n_ref)
    peak = level = math.inf
    for iteration in range(1, max_iter + 1):
        system = np.column_stack([cheb.chebvander(t[ref], degree), signs])
        solution = np.linalg.solve(system, fx[ref])
        coefficients, level = solution[:-1], float(solution[-1])

        err = fx - cheb.chebval(t, coefficients)
        peak = float(np.max(np.abs(err)))
        logger.debug(
            f'Remez degree {degree} iteration {iteration}: '
            f'level={abs(level)!r}, peak={peak!r}'
        )
        if peak - abs(level) <= tol * max(peak, np.finfo(float).tiny):
            return BestPolynomial(
                coefficients=tuple(float(c) for c in coefficients),
                interval=interval,
                error=peak,
                level=abs(level),
                reference=tuple(float(v) for v in x[ref]),
                iterations=iteration
            )

        new_ref = exchange_reference(err, ref, n_ref)
        if np.array_equal(new_ref, ref):
            break
        ref = new_ref

    raise NumericError(
        f'Remez exchange for degree {degree} did not converge',
        diagnostics={'iterations': max_iter, 'peak': peak, 'level': level}
    )


def best_poly_relu(degree: int) -> BestPolynomial:
    if degree < 1:
        raise DomainError(f'Degree must be at least 1, got {degree}')
    return best_polynomial(relu, degree)


# -----------------------------------------------------------------------------
# Rational minimax (Lawson + differential correction)
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class MinimaxResult:
    rational: RationalFunction
    error: float
    reference: tuple[float, ...]
    levels: tuple[float, ...]
    lawson_error: float
    lawson_iterations: int
    polish_iterations: int
    parity: Optional[str]


def _parity(fx: np.ndarray) -> Optional[str]:
    # Only meaningful on a grid symmetric about 0
    scale = max(1.0, float(np.max(np.abs(fx))))
    mirrored = fx[::-1]
    if np.max(np.abs(fx - mirrored)) <= 1e-14 * scale:
        return 'even'
    if np.max(np.abs(fx + mirrored)) <= 1e-14 * scale:
        return 'odd'
    return None


def _powers(r_p: int, r_q: int, parity: Optional[str]) -> tuple[list, list]:
    match parity:
        case 'even':
            return list(range(0, r_p + 1, 2)), list(range(0, r_q + 1, 2))
        case 'odd':
            return list(range(1, r_p + 1, 2)), list(range(0, r_q + 1, 2))
        case _:
            return list(range(r_p + 1)), list(range(r_q + 1))


def _lawson(
    fx: np.ndarray,
    vp: np.ndarray,
    vq: np.ndarray,
    max_iter: int,
    exact: float
) -> tuple[Optional[tuple[np.ndarray, np.ndarray]], float, int]:
    """
    Iteratively reweighted linearized least squares (Lawson weights, Loeb
    denominator scaling). Returns the best iterate seen.
    """
    n = fx.size
    weights = np.full(n, 1.0 / n)
    q_prev = np.ones(n)
    best: Optional[tuple[np.ndarray, np.ndarray]] = None
    best_error = math.inf
    previous = math.inf
    iteration = 0

    for iteration in range(1, max_iter + 1):
        scale = np.sqrt(weights) / np.abs(q_prev)
        system = np.hstack([vp, -fx[:, None] * vq]) * scale[:, None]
        _, _, vt = np.linalg.svd(system, full_matrices=False)
        a, b = vt[-1, :vp.shape[1]], vt[-1, vp.shape[1]:]

        q = vq @ b
        if not (np.all(q > 0) or np.all(q < 0)):
            logger.debug(f'Lawson iteration {iteration}: pole on the grid')
            break
        if q[0] < 0:
            a, b, q = -a, -b, -q

        err = fx - (vp @ a) / q
        peak = float(np.max(np.abs(err)))
        if peak < best_error:
            best, best_error = (a, b), peak
        if peak <= exact or abs(previous - peak) <= 1e-12 * peak:
            break

        previous = peak
        weights = weights * np.abs(err)
        total = weights.sum()
        if not total > 0:
            break
        weights /= total
        q_prev = q

    logger.debug(f'Lawson stopped after {iteration} iterations: {best_error!r}')
    return best, best_error, iteration


def _differential_correction(
    fx: np.ndarray,
    vp: np.ndarray,
    vq: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    max_iter: int
) -> tuple[np.ndarray, np.ndarray, int]:
    """
    Each step solves one LP: minimize delta subject to
    |f Q - P| - Delta_k Q <= delta Q_k and |b_j| <= 1, then keeps the new
    (P, Q) only if it lowers the max error.
    """
    n_a, n_b = vp.shape[1], vq.shape[1]
    cost = np.zeros(n_a + n_b + 1)
    cost[-1] = 1.0
    bounds = [(None, None)] * n_a + [(-1.0, 1.0)] * n_b + [(None, None)]

    iteration = 0
    for iteration in range(1, max_iter + 1):
        scale = np.max(np.abs(b))
        a, b = a / scale, b / scale
        q = vq @ b
        delta = float(np.max(np.abs(fx - (vp @ a) / q)))

        upper = np.hstack([-vp, (fx - delta)[:, None] * vq, -q[:, None]])
        lower = np.hstack([vp, (-fx - delta)[:, None] * vq, -q[:, None]])
        result = linprog(
            cost,
            A_ub=np.vstack([upper, lower]),
            b_ub=np.zeros(2 * fx.size),
            bounds=bounds,
            method='highs'
        )
        if result.status != 0:
            logger.debug(f'Correction LP stopped: {result.message}')
            break

        a_new, b_new = result.x[:n_a], result.x[n_a:n_a + n_b]
        q_new = vq @ b_new
        if np.min(q_new) <= 0:
            break
        delta_new = float(np.max(np.abs(fx - (vp @ a_new) / q_new)))
        logger.debug(
            f'Correction step {iteration}: {delta!r} -> {delta_new!r}'
        )
        if delta_new >= delta * (1.0 - 1e-13):
            break
        a, b = a_new, b_new

    return a, b, iteration


def _embed(
    values: np.ndarray,
    powers: Sequence[int],
    degree: int
) -> np.ndarray:
    full = np.zeros(degree + 1)
    full[list(powers)] = values
    return full


def minimax_rational(
    f: RealFunction,
    type_: tuple[int, int],
    interval: Interval = UNIT,
    n_grid: int = MINIMAX_GRID,
    max_lawson: int = 300,
    max_polish: int = 60
) -> MinimaxResult:
    """
    Near-best rational approximant of type (r_P, r_Q) to f on `interval`.

    Lawson's reweighted least squares gives the starting point; differential
    correction then converges to the discrete minimax solution on the grid.
    Exactly even or odd targets on symmetric intervals keep the matching
    coefficient pattern. Raises NumericError when Lawson stops before any
    pole-free iterate, or when the result has a pole on `interval`.
    """
    r_p, r_q = type_
    if r_p < 0 or r_q < 0 or r_p + r_q > 12:
        raise DomainError(f'Unsupported rational type {type_}')

    x = chebyshev_grid(interval, n_grid)
    t = _to_unit(x, interval)
    fx = np.array(evaluate_on(f, x))
    scale = max(1.0, float(np.max(np.abs(fx))))
    exact = 1e-13 * scale

    parity = _parity(fx) if interval.symmetric else None
    p_powers, q_powers = _powers(r_p, r_q, parity)
    vp = t[:, None] ** np.array(p_powers)
    vq = t[:, None] ** np.array(q_powers)

    start, lawson_error, lawson_iterations = _lawson(
        fx, vp, vq, max_lawson, exact
    )
    if start is None:
        raise NumericError(
            f'Lawson iteration for type {type_} found no pole-free iterate '
            f'on {interval}',
            diagnostics={'lawson_iterations': lawson_iterations}
        )
    a, b = start

    polish_iterations = 0
    if lawson_error > exact:
        a, b, polish_iterations = _differential_correction(
            fx, vp, vq, a, b, max_polish
        )

    numer = Polynomial(_embed(a, p_powers, r_p))
    denom = Polynomial(_embed(b, q_powers, r_q))
    if interval != UNIT:
        t_of_x = Polynomial([-(interval.lo + interval.hi) / interval.width,
                             2.0 / interval.width])
        numer, denom = numer(t_of_x), denom(t_of_x)
    rational = RationalFunction.from_coefficients(
        numer.coef, denom.coef
    ).normalized()

    if not pole_check(rational, interval):
        raise NumericError(
            f'Minimax approximant of type {type_} has a pole on {interval}',
            diagnostics={'denominator': rational.denom,
                         'lawson_error': lawson_error}
        )

    err = fx - rational(x)
    extrema = alternating_extrema(err)
    result = MinimaxResult(
        rational=rational,
        error=float(np.max(np.abs(err))),
        reference=tuple(float(v) for v in x[extrema]),
        levels=tuple(float(v) for v in err[extrema]),
        lawson_error=lawson_error,
        lawson_iterations=lawson_iterations,
        polish_iterations=polish_iterations,
        parity=parity
    )
    logger.info(
        f'Minimax type {type_} on {interval}: error={result.error!r} '
        f'(Lawson {lawson_error!r} after {lawson_iterations} iterations, '
        f'{polish_iterations} correction steps)'
    )
    return result


def table_residuals(
    rational: RationalFunction,
    table: RationalFunction = RELU_INIT_TABLE
) -> dict[str, float]:
    """
    Max coefficient difference to `table` under two normalizations: constant
    denominator term equal to 1, and unit 2-norm of all coefficients.
    """
    def padded(r: RationalFunction) -> np.ndarray:
        numer = np.zeros(max(len(rational.numer), len(table.numer)))
        denom = np.zeros(max(len(rational.denom), len(table.denom)))
        numer[:len(r.numer)] = r.numer
        denom[:len(r.denom)] = r.denom
        return np.concatenate([numer, denom])

    ours, theirs = padded(rational.normalized()), padded(table.normalized())
    return {
        'constant_term': float(np.max(np.abs(ours - theirs))),
        'unit_norm': float(np.max(np.abs(
            ours / np.linalg.norm(ours) - theirs / np.linalg.norm(theirs)
        ))),
    }


# -----------------------------------------------------------------------------
# Convergence table
# -----------------------------------------------------------------------------

class Family(Enum):
    """
    Approximant families compared by parameter count.

    ZOLOTAREV:
        p composed type-(3,2) sign stages, 7p parameters.

    NEWMAN:
        Newman rational of order N, 2N + 3 parameters.

    BEST_POLY:
        Best polynomial of degree d, d + 1 parameters.
    """
    ZOLOTAREV = 'zolotarev'
    NEWMAN = 'newman'
    BEST_POLY = 'best_poly'


Approximant = Union[ReluApproximant, NewmanRelu, BestPolynomial]


def approximant_for_budget(family: Family, budget: int) -> Approximant:
    """
    Largest member of `family` whose parameter count fits in `budget`.
    """
    match family:
        case Family.ZOLOTAREV:
            p = budget // 7
            if not 1 <= p <= MAX_STAGES:
                raise RangeError(
                    f'Zolotarev budget {budget} outside 7..{7 * MAX_STAGES}',
                    admissible=7 * MAX_STAGES
                )
            ell = gap_for_stages(p)
            return ReluApproximant(0.0, ell, compose_stages(p, ell))
        case Family.NEWMAN:
            N = (budget - 3) // 2
            if N < 4:
                raise RangeError(
                    f'Newman budget {budget} below the minimum of 11',
                    admissible=11
                )
            return newman_relu(min(N, NEWMAN_MAX))
        case Family.BEST_POLY:
            if budget < 2:
                raise RangeError(
                    f'Polynomial budget {budget} below 2', admissible=2
                )
            return best_poly_relu(budget - 1)
    raise DomainError(f'Unknown family {family}')


def convergence_table(
    family: Union[Family, str],
    budgets: Sequence[int],
    n_grid: int = DEFAULT_GRID
) -> pd.DataFrame:
    """
    Rows of (family, param_count, sup_error) for ReLU on [-1, 1], sorted by
    parameter count, one row per distinct approximant.
    """
    family = Family(family)
    rows = {}
    for budget in budgets:
        approximant = approximant_for_budget(family, budget)
        count = approximant.param_count()
        if count in rows:
            continue
        report = sup_error(relu, approximant, UNIT, n_grid)
        logger.info(
            f'{family.value} with {count} parameters: '
            f'{report.max_abs_error!r}'
        )
        rows[count] = report.max_abs_error

    return pd.DataFrame(
        [(family.value, count, rows[count]) for count in sorted(rows)],
        columns=['family', 'param_count', 'sup_error']
    )
