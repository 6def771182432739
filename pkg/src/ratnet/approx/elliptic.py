"""
Complete elliptic integral of the first kind and the Jacobi elliptic
functions sn, cn, dn, as needed by the Zolotarev construction.

K is computed with the arithmetic-geometric mean, the Jacobi functions with
the descending Landen (AGM with phase) recursion. Moduli close to 1 should be
built with `EllipticModulus.from_complement` so the complementary modulus
is carried exactly instead of being recovered from 1 - kappa**2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.typing as npt

from ratnet.errors import DomainError, NumericError
from ratnet.utils.logging_config import get_logger


logger = get_logger(__name__)

# Landen/AGM sequences converge quadratically; this is a hard ceiling
MAX_STEPS = 64

# Above this kappa**2 the complement is derived as sqrt((1-k)(1+k))
COMPLEMENT_SWITCH = 1.0 - 1e-12


@dataclass(frozen=True)
class EllipticModulus:
    kappa: float
    complement: Optional[float] = None

    def __post_init__(self) -> None:
        if self.complement is None:
            if not 0.0 <= self.kappa < 1.0:
                raise DomainError(
                    f'Elliptic modulus must lie in [0, 1), got {self.kappa}'
                )
        elif not 0.0 < self.complement <= 1.0:
            raise DomainError(
                f'Complementary modulus must lie in (0, 1], '
                f'got {self.complement}'
            )

    @classmethod
    def from_complement(cls, kappa_prime: float) -> EllipticModulus:
        """
        Modulus with sqrt(1 - kappa**2) == kappa_prime held exactly.

        kappa_prime stays the primary value. Below kappa_prime ~ 1e-8 the
        modulus rounds to 1.0, so it is clamped to the largest float under 1.
        """
        if not 0.0 < kappa_prime <= 1.0:
            raise DomainError(
                f'Complementary modulus must lie in (0, 1], got {kappa_prime}'
            )
        kappa = math.sqrt((1.0 - kappa_prime) * (1.0 + kappa_prime))
        return cls(min(kappa, math.nextafter(1.0, 0.0)), kappa_prime)

    @property
    def kappa_prime(self) -> float:
        if self.complement is not None:
            return self.complement
        if self.kappa ** 2 > COMPLEMENT_SWITCH:
            logger.debug(
                f'kappa={self.kappa!r} is within 1e-12 of 1; using the '
                f'complementary formulation'
            )
        return math.sqrt((1.0 - self.kappa) * (1.0 + self.kappa))


def agm(a: float, b: float) -> float:
    for _ in range(MAX_STEPS):
        if abs(a - b) <= 4 * np.finfo(float).eps * a:
            return a
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    raise NumericError(
        f'AGM did not converge from ({a}, {b})',
        diagnostics={'steps': MAX_STEPS}
    )


def complete_K(m: EllipticModulus) -> float:
    """
    K(kappa) = pi / (2 AGM(1, kappa')).
    """
    return math.pi / (2.0 * agm(1.0, m.kappa_prime))


def _landen_sequence(m: EllipticModulus) -> tuple[list[float], list[float]]:
    a = [1.0]
    c = [m.kappa]
    b = m.kappa_prime

    for _ in range(MAX_STEPS):
        if abs(c[-1]) <= np.finfo(float).eps * a[-1]:
            return a, c
        a_prev = a[-1]
        a.append(0.5 * (a_prev + b))
        c.append(0.5 * (a_prev - b))
        b = math.sqrt(a_prev * b)

    raise NumericError(
        f'Descending Landen recursion did not converge for kappa={m.kappa}',
        diagnostics={'steps': MAX_STEPS, 'last_c': c[-1]}
    )


def jacobi_sncndn(
    u: npt.ArrayLike,
    m: EllipticModulus
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    sn, cn and dn of u for modulus m (vectorized over u).
    """
    u_arr = np.asarray(u, dtype=float)
    if m.kappa == 0.0:
        return np.sin(u_arr), np.cos(u_arr), np.ones_like(u_arr)

    a, c = _landen_sequence(m)
    n = len(a) - 1
    logger.debug(f'Landen recursion for kappa={m.kappa!r}: {n} steps')

    phi = (2.0 ** n) * a[n] * u_arr
    phi_next = phi
    for i in range(n, 0, -1):
        phi_next = phi
        ratio = np.clip(c[i] / a[i] * np.sin(phi), -1.0, 1.0)
        phi = 0.5 * (phi + np.arcsin(ratio))

    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = cn / np.cos(phi_next - phi)
    return sn, cn, dn


def jacobi_sn(u: npt.ArrayLike, m: EllipticModulus) -> np.ndarray:
    sn, _, _ = jacobi_sncndn(u, m)
    return sn.item() if np.ndim(u) == 0 else sn
