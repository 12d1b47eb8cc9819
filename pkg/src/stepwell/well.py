"""Bound states of the finite symmetric square well.

The log-price corridor (a, b) is the inside of the well; outside it the
potential is the step intensity V0.  Every bound state contributes one
decaying term to the pricing kernel, so this module is the core of both
pricing engines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DomainError, LevelIndexError

EVEN = "even_function"
ODD = "odd_function"

# Relative bracket width at which bisection hands over to Newton.
BISECT_REL_WIDTH = 1e-12
NEWTON_STEPS = 5
# Roots closer than this (relative) to k = beta are treated as unbound.
EDGE_REL = 1e-12


@dataclass(frozen=True)
class WellSpec:
    """Barrier corridor (a, b) in log-price and the step intensity v0."""

    a: float
    b: float
    v0: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError("barriers must be finite")
        if not self.a < self.b:
            raise DomainError(f"need a < b, got a={self.a}, b={self.b}")
        if not (self.v0 > 0 and math.isfinite(self.v0)):
            raise DomainError(f"v0 must be positive and finite (no bound states otherwise), got {self.v0}")

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)


@dataclass(frozen=True)
class EigenLevel:
    n: int
    k1: float
    k2: float
    parity: str
    a1: float
    a2: float
    edge: float  # phi at the upper wall x = b; tails are edge * e^{-k2 (|x-c| - h)}


@dataclass(frozen=True)
class Spectrum:
    well: WellSpec
    sigma: float
    beta: float
    levels: Tuple[EigenLevel, ...]

    def __len__(self):
        return len(self.levels)

    @property
    def k1(self) -> np.ndarray:
        return np.array([lv.k1 for lv in self.levels])

    @property
    def k2(self) -> np.ndarray:
        return np.array([lv.k2 for lv in self.levels])


def compute_beta(well: WellSpec, sigma: float) -> float:
    """Radius of the (k1, k2) circle: sqrt(2 v0) / sigma."""
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if not well.v0 > 0:
        raise DomainError(f"v0 must be positive, got {well.v0}")
    return math.sqrt(2.0 * well.v0) / sigma


def _asin_clamped(u: float) -> float:
    if u > 1.0:
        u = 1.0
    elif u < -1.0:
        u = -1.0
    return math.asin(u)


def level_function(k: float, width: float, beta: float, n: int) -> float:
    """Residual of the energy-level condition; zero at the n-th bound state."""
    return 0.5 * k * width + _asin_clamped(k / beta) - 0.5 * n * math.pi


def count_bound_states(well: WellSpec, sigma: float) -> int:
    beta = compute_beta(well, sigma)
    k_top = beta * (1.0 - EDGE_REL)
    # level_function(k_top, n) > 0  <=>  n < 2 g / pi
    g = 0.5 * k_top * well.width + _asin_clamped(k_top / beta)
    return max(math.ceil(2.0 * g / math.pi) - 1, 0)


def _make_level(well: WellSpec, beta: float, n: int, k1: float) -> EigenLevel:
    k2 = math.sqrt((beta - k1) * (beta + k1))
    half = 0.5 * well.width
    a1 = math.sqrt(2.0 * k2 / (k2 * well.width + 2.0))
    if n % 2:
        parity = EVEN
        edge = a1 * math.cos(k1 * half)
    else:
        parity = ODD
        edge = a1 * math.sin(k1 * half)
    try:
        a2 = edge * math.exp(k2 * half)
    except OverflowError:
        a2 = math.copysign(math.inf, edge)
    return EigenLevel(n=n, k1=k1, k2=k2, parity=parity, a1=a1, a2=a2, edge=edge)


def _solve_k1(width: float, beta: float, n: int) -> float:
    lo, hi = beta * 1e-6, beta * (1.0 - EDGE_REL)
    f_lo = level_function(lo, width, beta, n)
    f_hi = level_function(hi, width, beta, n)
    if not (f_lo < 0.0 < f_hi):
        raise LevelIndexError(f"level n={n} has no root on (0, beta={beta:.6g})")
    while hi - lo > BISECT_REL_WIDTH * beta:
        mid = 0.5 * (lo + hi)
        if level_function(mid, width, beta, n) < 0.0:
            lo = mid
        else:
            hi = mid
    k = 0.5 * (lo + hi)
    for _ in range(NEWTON_STEPS):
        f = level_function(k, width, beta, n)
        if f == 0.0:
            break
        df = 0.5 * width + 1.0 / math.sqrt((beta - k) * (beta + k))
        k_new = k - f / df
        if not lo <= k_new <= hi:
            break
        k = k_new
    return k


def solve_level(well: WellSpec, sigma: float, n: int) -> EigenLevel:
    """Solve the n-th (1-based) bound state.

    The level function is strictly increasing on (0, beta), so a bisection
    bracket always exists; a few Newton steps polish the root.
    """
    n_max = count_bound_states(well, sigma)
    if not 1 <= n <= n_max:
        raise LevelIndexError(f"level index {n} outside 1..{n_max}")
    beta = compute_beta(well, sigma)
    k1 = _solve_k1(well.width, beta, n)
    return _make_level(well, beta, n, k1)


def build_spectrum(well: WellSpec, sigma: float) -> Spectrum:
    beta = compute_beta(well, sigma)
    n_max = count_bound_states(well, sigma)
    levels = tuple(
        _make_level(well, beta, n, _solve_k1(well.width, beta, n)) for n in range(1, n_max + 1)
    )
    return Spectrum(well=well, sigma=sigma, beta=beta, levels=levels)


def approx_level_low_energy(well: WellSpec, sigma: float, n: int) -> float:
    """Low-energy wavenumber estimate, arcsin(k/beta) ~ k/beta."""
    if n < 1:
        raise LevelIndexError(f"level index must be >= 1, got {n}")
    beta = compute_beta(well, sigma)
    return beta * n * math.pi / (beta * well.width + 2.0)


def eval_wavefunction(level: EigenLevel, well: WellSpec, x):
    """Normalised eigenfunction at log-price x (scalar or array)."""
    xs = np.asarray(x, dtype=float)
    u = xs - well.center
    half = 0.5 * well.width
    inside = np.abs(u) <= half
    trig = np.cos if level.parity == EVEN else np.sin
    # outside: a2 exp(-k2 |u|), antisymmetric for odd-function levels
    tail = level.edge * np.exp(-level.k2 * np.where(inside, 0.0, np.abs(u) - half))
    if level.parity == ODD:
        tail = np.sign(u) * tail
    out = np.where(inside, level.a1 * trig(level.k1 * u), tail)
    return out if out.ndim else float(out)
