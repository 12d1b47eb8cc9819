"""Digamma and trigamma on the positive real axis.

Both use upward recurrence to push the argument past ``SHIFT`` and then
the Bernoulli asymptotic series through the B12 term.
"""

from __future__ import annotations

import math

from .errors import DomainError

SHIFT = 10.0

# B_{2k} for k = 1..6
_BERNOULLI = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730)


def _check(z: float) -> float:
    z = float(z)
    if not z > 0 or not math.isfinite(z):
        raise DomainError(f"argument must be positive and finite, got {z}")
    return z


def digamma(z: float) -> float:
    """psi(z) = d/dz log Gamma(z), for z > 0."""
    z = _check(z)
    acc = 0.0
    while z < SHIFT:
        acc -= 1.0 / z
        z += 1.0
    inv2 = 1.0 / (z * z)
    series = 0.0
    p = inv2
    for k, b in enumerate(_BERNOULLI, start=1):
        series += b / (2 * k) * p
        p *= inv2
    return acc + math.log(z) - 0.5 / z - series


def trigamma(z: float) -> float:
    """psi'(z) for z > 0."""
    z = _check(z)
    acc = 0.0
    while z < SHIFT:
        acc += 1.0 / (z * z)
        z += 1.0
    inv = 1.0 / z
    inv2 = inv * inv
    # 1/z + 1/(2 z^2) + sum B_2k / z^(2k+1)
    series = 0.0
    p = inv2 * inv
    for b in _BERNOULLI:
        series += b * p
        p *= inv2
    return acc + inv + 0.5 * inv2 + series


def harmonic_shift(z: float, n: int) -> float:
    """sum_{j=0}^{n-1} 1/(z+j), via psi(z+n) - psi(z)."""
    return digamma(z + n) - digamma(z)


def inverse_square_shift(z: float, n: int) -> float:
    """sum_{j=0}^{n-1} 1/(z+j)^2, via psi'(z) - psi'(z+n)."""
    return trigamma(z) - trigamma(z + n)
