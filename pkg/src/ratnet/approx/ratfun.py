"""
Rational functions, their compositions, pole screening and sup-norm
certification on Chebyshev grids.

Coefficients are stored in ascending degree order throughout:
`numer[i]` multiplies x**i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt
from numpy.polynomial import polynomial as npoly

from ratnet.errors import DomainError, EvaluationError
from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)

RealFunction = Callable[[np.ndarray], npt.ArrayLike]
Scalar = Union[float, np.floating]

# Default grid size for sup-norm sweeps
DEFAULT_GRID = 100_000

# Relative threshold below which a denominator value counts as a pole
POLE_TOLERANCE = 1e-8


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError(f'Interval bounds must be finite: {self}')
        if not self.lo < self.hi:
            raise DomainError(f'Interval requires lo < hi, got {self}')

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def symmetric(self) -> bool:
        return self.lo == -self.hi

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


UNIT = Interval(-1.0, 1.0)


@dataclass(frozen=True)
class SupNormReport:
    grid_size: int
    max_abs_error: float
    argmax: float


def chebyshev_grid(interval: Interval, n: int) -> np.ndarray:
    """
    Chebyshev points of the second kind on `interval`, ascending.

    Uses the sine form so the grid is exactly symmetric about the midpoint,
    contains both endpoints, and contains the midpoint when `n` is odd.
    """
    if n < 1:
        raise DomainError(f'Grid size must be positive, got {n}')
    if n == 1:
        return np.array([0.5 * (interval.lo + interval.hi)])

    j = np.arange(n, dtype=float)
    t = np.sin(np.pi * (2.0 * j - (n - 1)) / (2.0 * (n - 1)))

    mid = 0.5 * (interval.lo + interval.hi)
    half = 0.5 * (interval.hi - interval.lo)
    x = mid + half * t
    x[0], x[-1] = interval.lo, interval.hi
    return x


def horner(coeffs: Sequence[float], x: npt.ArrayLike) -> np.ndarray:
    """
    Evaluate sum(coeffs[i] * x**i) by Horner's recurrence.
    """
    x = np.asarray(x, dtype=float)
    result = np.full_like(x, coeffs[-1], dtype=float)
    for c in reversed(coeffs[:-1]):
        result = result * x + c
    return result


def relu(x: npt.ArrayLike) -> np.ndarray:
    return np.maximum(np.asarray(x, dtype=float), 0.0)


def _check_finite(
    values: np.ndarray,
    x: np.ndarray,
    what: str,
    stage: Optional[int] = None
) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        x_bad = float(np.broadcast_to(x, values.shape)[bad].flat[0])
        where = f' (stage {stage})' if stage is not None else ''
        raise EvaluationError(
            f'{what} is not finite at x={x_bad!r}{where}',
            x=x_bad,
            stage=stage
        )


def _as_output(values: np.ndarray, x: npt.ArrayLike) -> np.ndarray:
    # Scalars in, scalars out
    if np.ndim(x) == 0:
        return values.item()
    return values


def _trim(coeffs: Sequence[float]) -> tuple[float, ...]:
    out = [float(c) for c in coeffs]
    while len(out) > 1 and out[-1] == 0.0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class RationalFunction:
    """
    P(x)/Q(x) with P = sum numer[i] x^i and Q = sum denom[j] x^j.

    The trailing coefficient of each polynomial is nonzero, so `type()`
    reports the true degrees. The zero function is the single exception and
    is stored as `numer == (0.0,)`.
    """
    numer: tuple[float, ...]
    denom: tuple[float, ...]

    def __post_init__(self) -> None:
        numer = tuple(float(c) for c in self.numer)
        denom = tuple(float(c) for c in self.denom)
        object.__setattr__(self, 'numer', numer)
        object.__setattr__(self, 'denom', denom)

        if not numer or not denom:
            raise DomainError('Rational function needs coefficients')
        if not all(map(math.isfinite, numer + denom)):
            raise DomainError(f'Non-finite coefficient in {self}')
        if denom[-1] == 0.0:
            raise DomainError(
                f'Trailing denominator coefficient must be nonzero: {denom}'
            )
        if numer[-1] == 0.0 and len(numer) > 1:
            raise DomainError(
                f'Trailing numerator coefficient must be nonzero: {numer}'
            )

    @classmethod
    def from_coefficients(
        cls,
        numer: npt.ArrayLike,
        denom: npt.ArrayLike
    ) -> RationalFunction:
        """
        Build from arrays, dropping trailing zero coefficients.
        """
        return cls(
            _trim(np.atleast_1d(np.asarray(numer, dtype=float))),
            _trim(np.atleast_1d(np.asarray(denom, dtype=float)))
        )

    @classmethod
    def polynomial(cls, coeffs: npt.ArrayLike) -> RationalFunction:
        return cls.from_coefficients(coeffs, [1.0])

    # -------------------------------------------------------------------------
    # Degree and parameter accounting
    # -------------------------------------------------------------------------

    @property
    def r_p(self) -> int:
        return len(self.numer) - 1

    @property
    def r_q(self) -> int:
        return len(self.denom) - 1

    def type(self) -> tuple[int, int]:
        return (self.r_p, self.r_q)

    def degree(self) -> int:
        return max(self.r_p, self.r_q)

    def param_count(self) -> int:
        return len(self.numer) + len(self.denom)

    def node_count(self) -> int:
        return 1

    # -------------------------------------------------------------------------
    # Evaluation
    # -------------------------------------------------------------------------

    def numerator(self, x: npt.ArrayLike) -> np.ndarray:
        return horner(self.numer, x)

    def denominator(self, x: npt.ArrayLike) -> np.ndarray:
        return horner(self.denom, x)

    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        xa = np.asarray(x, dtype=float)
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            values = self.numerator(xa) / self.denominator(xa)
        _check_finite(values, xa, 'Rational function value')
        return _as_output(values, x)

    def derivative(self, x: npt.ArrayLike) -> np.ndarray:
        """
        (P'Q - PQ') / Q^2.
        """
        xa = np.asarray(x, dtype=float)
        p, q = self.numerator(xa), self.denominator(xa)
        dp = horner(npoly.polyder(self.numer) if self.r_p else [0.0], xa)
        dq = horner(npoly.polyder(self.denom) if self.r_q else [0.0], xa)
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            values = (dp * q - p * dq) / (q * q)
        _check_finite(values, xa, 'Rational function derivative')
        return _as_output(values, x)

    # -------------------------------------------------------------------------
    # Algebra
    # -------------------------------------------------------------------------

    def scaled(self, factor: float) -> RationalFunction:
        return RationalFunction.from_coefficients(
            np.asarray(self.numer) * factor, self.denom
        )

    def normalized(self) -> RationalFunction:
        """
        Scale numerator and denominator so the constant denominator term is 1
        (falls back to the trailing term when b_0 vanishes).
        """
        b = np.asarray(self.denom)
        pivot = b[0] if abs(b[0]) > 1e-12 * np.max(np.abs(b)) else b[-1]
        return RationalFunction.from_coefficients(
            np.asarray(self.numer) / pivot, b / pivot
        )

    def compose(self, inner: RationalFunction) -> RationalFunction:
        """
        Expanded coefficients of self(inner(x)).

        With d = degree(self), self(P/Q) = sum a_i P^i Q^(d-i) /
        sum b_j P^j Q^(d-j).
        """
        d = self.degree()
        p, q = np.asarray(inner.numer), np.asarray(inner.denom)

        def expand(coeffs: tuple[float, ...]) -> np.ndarray:
            total = np.zeros(1)
            for i, c in enumerate(coeffs):
                if c == 0.0:
                    continue
                term = npoly.polymul(npoly.polypow(p, i), npoly.polypow(q, d - i))
                total = npoly.polyadd(total, c * term)
            return total

        return RationalFunction.from_coefficients(
            expand(self.numer), expand(self.denom)
        )


@dataclass(frozen=True)
class ComposedRational:
    """
    Stages applied left to right: stages[-1](...stages[0](x)).
    """
    stages: tuple[RationalFunction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'stages', tuple(self.stages))
        if not self.stages:
            raise DomainError('A composition needs at least one stage')

    def degree(self) -> int:
        return math.prod(stage.degree() for stage in self.stages)

    def param_count(self) -> int:
        return sum(stage.param_count() for stage in self.stages)

    def node_count(self) -> int:
        return len(self.stages)

    def __len__(self) -> int:
        return len(self.stages)

    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        y = np.asarray(x, dtype=float)
        for index, stage in enumerate(self.stages):
            try:
                y = np.asarray(stage(y), dtype=float)
            except EvaluationError as e:
                raise EvaluationError(
                    f'Stage {index} failed: {e}', x=e.x, stage=index
                ) from e
        return _as_output(y, x)

    def expand(self) -> RationalFunction:
        """
        The composition as a single (high degree) rational function.
        """
        result = self.stages[0]
        for stage in self.stages[1:]:
            result = stage.compose(result)
        return result


def eval_composed(c: ComposedRational, x: npt.ArrayLike) -> np.ndarray:
    return c(x)


def denominator_ok(
    denom: Sequence[float],
    interval: Interval,
    n_grid: int = 10_001
) -> bool:
    """
    True iff Q keeps one sign on the grid and |Q| stays above
    POLE_TOLERANCE * max(1, max|Q|).
    """
    if n_grid < 2:
        raise DomainError(f'Pole screening needs n_grid >= 2, got {n_grid}')
    q = horner(denom, chebyshev_grid(interval, n_grid))
    if not np.all(np.isfinite(q)):
        return False
    scale = max(1.0, float(np.max(np.abs(q))))
    if np.min(np.abs(q)) <= POLE_TOLERANCE * scale:
        return False
    return bool(np.all(q > 0) or np.all(q < 0))


def pole_check(
    r: RationalFunction,
    interval: Interval,
    n_grid: int = 10_001
) -> bool:
    return denominator_ok(r.denom, interval, n_grid)


def evaluate_on(fn: RealFunction, x: np.ndarray) -> np.ndarray:
    """
    Evaluate a vectorized function on `x`, broadcasting constant results.
    """
    values = np.asarray(fn(x), dtype=float)
    return np.broadcast_to(values, x.shape)


def sup_error(
    f: RealFunction,
    g: RealFunction,
    interval: Interval = UNIT,
    n_grid: int = DEFAULT_GRID
) -> SupNormReport:
    """
    Max of |f - g| over `n_grid` Chebyshev points of `interval`.

    Ties go to the smallest x.
    """
    x = chebyshev_grid(interval, n_grid)
    fx = evaluate_on(f, x)
    gx = evaluate_on(g, x)
    _check_finite(fx, x, 'First function')
    _check_finite(gx, x, 'Second function')

    diff = np.abs(fx - gx)
    index = int(np.argmax(diff))
    report = SupNormReport(
        grid_size=n_grid,
        max_abs_error=float(diff[index]),
        argmax=float(x[index])
    )
    logger.debug(f'sup_error on {interval}: {report}')
    return report


def alternation_count(errors: npt.ArrayLike, rel_tol: float = 1e-3) -> int:
    """
    Number of sign alternations among the points where |error| is within
    `rel_tol` (relative) of its maximum, scanning left to right.
    """
    err = np.asarray(errors, dtype=float)
    peak = float(np.max(np.abs(err))) if err.size else 0.0
    if peak == 0.0:
        return 0

    signs = np.sign(err[np.abs(err) >= (1.0 - rel_tol) * peak])
    return 1 + int(np.count_nonzero(np.diff(signs) != 0))
