"""Eigenfunction-expansion pricer for proportional double-barrier step calls
with constant rate and volatility.

With the drift removed by the similarity transform e^{alpha x}, the pricing
kernel is

    P(x, x'; tau) = e^{-gamma tau} e^{alpha (x - x')}
                    * sum_n e^{-tau sigma^2 k1n^2 / 2} phi_n(x) phi_n(x')

and the call price is the integral of P against (e^{x'} - K) over
x' > ln K.  Each term of that integral has a closed-form antiderivative.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, NoBoundStatesError, UnsupportedConfigurationError
from .well import EVEN, EigenLevel, Spectrum, WellSpec, build_spectrum, eval_wavefunction

log = logging.getLogger(__name__)

SDB_REL_TOL = 1e-12
SDB_MAX_TERMS = 100_000
# gamma/v0 ratio above which ignoring gamma in the binding bound is reported
GAMMA_RATIO_WARN = 1e-3


class DivergentTailWarning(RuntimeWarning):
    """A level's payoff tail integral diverges; the level was dropped."""


@dataclass(frozen=True)
class DriftTransform:
    alpha: float
    gamma: float


@dataclass(frozen=True)
class Contract:
    strike: float
    tau: float

    def __post_init__(self):
        if not self.strike > 0:
            raise DomainError(f"strike must be positive, got {self.strike}")
        if not self.tau > 0:
            raise DomainError(f"tau must be positive, got {self.tau}")

    @property
    def log_strike(self) -> float:
        return math.log(self.strike)


@dataclass(frozen=True)
class PriceQuery:
    x: float
    terms: Optional[int] = None

    @classmethod
    def from_spot(cls, s0: float, terms: Optional[int] = None) -> "PriceQuery":
        return cls(math.log(s0), terms)


@dataclass(frozen=True)
class PriceResult:
    price: float
    terms_used: int
    dropped: Tuple[Tuple[int, float], ...] = ()
    contributions: Tuple[float, ...] = ()
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def last_term(self) -> float:
        return self.contributions[-1] if self.contributions else 0.0

    def __float__(self):
        return self.price


def drift_transform(r: float, sigma: float) -> DriftTransform:
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    s2 = sigma * sigma
    return DriftTransform(alpha=(0.5 * s2 - r) / s2, gamma=(0.5 * s2 + r) ** 2 / (2.0 * s2))


# closed-form antiderivatives of e^{p u} sin(k u), e^{p u} cos(k u)


def _prim_sin(p, k, u):
    return math.exp(p * u) * (p * math.sin(k * u) - k * math.cos(k * u)) / (p * p + k * k)


def _prim_cos(p, k, u):
    return math.exp(p * u) * (p * math.cos(k * u) + k * math.sin(k * u)) / (p * p + k * k)


def trig_exp_integral(parity: str, p: float, k: float, u0: float, u1: float) -> float:
    """Integral over [u0, u1] of e^{p u} cos(k u) (EVEN) or e^{p u} sin(k u)."""
    prim = _prim_cos if parity == EVEN else _prim_sin
    return prim(p, k, u1) - prim(p, k, u0)


def level_payoff_integral(
    level: EigenLevel, well: WellSpec, alpha: float, strike: float, tail_margin: float = 0.0
) -> Optional[float]:
    """Integral over x' > ln K of e^{-alpha (x'-c)} phi(x') (e^{x'} - K).

    Returns None when the outer tail diverges (k2 + alpha - 1 <= tail_margin).
    Requires ln K inside the corridor.
    """
    c = well.center
    h = 0.5 * well.width
    u_k = math.log(strike) - c
    if level.k2 + alpha - 1.0 <= tail_margin:
        return None
    p_spot, p_cash = 1.0 - alpha, -alpha
    inner = level.a1 * (
        math.exp(c) * trig_exp_integral(level.parity, p_spot, level.k1, u_k, h)
        - strike * trig_exp_integral(level.parity, p_cash, level.k1, u_k, h)
    )
    # phi = edge e^{-k2 (u - h)} for u > h
    outer = level.edge * (
        math.exp(c + p_spot * h) / (level.k2 - p_spot)
        - strike * math.exp(p_cash * h) / (level.k2 - p_cash)
    )
    return inner + outer


def check_strike(well: WellSpec, strike: float) -> None:
    lk = math.log(strike)
    if not well.a < lk < well.b:
        raise UnsupportedConfigurationError(
            f"ln K = {lk:.6g} must lie strictly inside the barrier corridor ({well.a}, {well.b})"
        )


def expansion_price(
    spectrum: Spectrum,
    strike: float,
    x: float,
    discount: float,
    weights: Sequence[float],
    alpha_in: float,
    alpha_out: float,
    terms: Optional[int] = None,
    tail_margin: float = 0.0,
) -> PriceResult:
    """Sum the per-level price contributions.

    price = discount * sum_n weights[n] e^{alpha_in (x-c)} phi_n(x)
            * int e^{-alpha_out (x'-c)} phi_n(x') (e^{x'} - K) dx'

    Shared by the constant and time-dependent engines.
    """
    well = spectrum.well
    check_strike(well, strike)
    levels = spectrum.levels
    if not levels:
        raise NoBoundStatesError("spectrum has no bound states")
    if len(weights) < len(levels):
        levels = levels[: len(weights)]
    if terms is not None:
        if terms < 1:
            raise DomainError(f"terms must be >= 1, got {terms}")
        levels = levels[:terms]
    tilt = math.exp(alpha_in * (x - well.center))
    contributions = []
    dropped = []
    for level, w in zip(levels, weights):
        integral = level_payoff_integral(level, well, alpha_out, strike, tail_margin)
        if integral is None:
            dropped.append((level.n, level.k2))
            contributions.append(0.0)
            continue
        phi_x = eval_wavefunction(level, well, x)
        contributions.append(discount * w * tilt * phi_x * integral)
    for n, k2 in dropped:
        warnings.warn(
            f"level n={n} dropped: payoff tail diverges (k2={k2:.6g}, alpha={alpha_out:.6g})",
            DivergentTailWarning,
            stacklevel=3,
        )
    return PriceResult(
        price=float(math.fsum(contributions)),
        terms_used=len(levels) - len(dropped),
        dropped=tuple(dropped),
        contributions=tuple(contributions),
    )


def kernel_const(
    well: WellSpec, dt: DriftTransform, spectrum: Spectrum, x, x_prime, tau: float
):
    """Pricing kernel P(x, x'; tau) summed over all bound states."""
    if not spectrum.levels:
        raise NoBoundStatesError("spectrum has no bound states")
    if spectrum.well != well:
        raise DomainError("spectrum was built for a different well")
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    s2 = spectrum.sigma ** 2
    total = 0.0
    for level in spectrum.levels:
        total = total + math.exp(-0.5 * tau * s2 * level.k1 ** 2) * eval_wavefunction(
            level, well, x
        ) * eval_wavefunction(level, well, x_prime)
    out = math.exp(-tau * dt.gamma) * np.exp(dt.alpha * (x - x_prime)) * total
    return out if np.ndim(out) else float(out)


def _warn_gamma(well: WellSpec, gamma: float) -> None:
    if gamma / well.v0 > GAMMA_RATIO_WARN:
        log.info(
            "gamma/v0 = %.3g exceeds %.0e; binding bound k1 < beta ignores gamma",
            gamma / well.v0,
            GAMMA_RATIO_WARN,
        )


def price_const(
    well: WellSpec,
    contract: Contract,
    r: float,
    sigma: float,
    query: PriceQuery,
    spectrum: Optional[Spectrum] = None,
    tail_margin: float = 0.0,
) -> PriceResult:
    """PDBS call price with constant r and sigma.  ``query.x`` is ln S0."""
    check_strike(well, contract.strike)
    dt = drift_transform(r, sigma)
    _warn_gamma(well, dt.gamma)
    if spectrum is None:
        spectrum = build_spectrum(well, sigma)
    elif spectrum.well != well or spectrum.sigma != sigma:
        raise DomainError("spectrum does not match (well, sigma)")
    s2 = sigma * sigma
    weights = [math.exp(-0.5 * contract.tau * s2 * lv.k1 ** 2) for lv in spectrum.levels]
    return expansion_price(
        spectrum,
        contract.strike,
        query.x,
        math.exp(-contract.tau * dt.gamma),
        weights,
        dt.alpha,
        dt.alpha,
        terms=query.terms,
        tail_margin=tail_margin,
    )


def price_sdb_limit(
    well: WellSpec, contract: Contract, r: float, sigma: float, query: PriceQuery
) -> PriceResult:
    """Standard (hard knock-out) double-barrier call: the infinite-depth limit.

    Uses the box eigenfunctions sqrt(2/L) sin(n pi (x - a) / L).
    """
    check_strike(well, contract.strike)
    x = query.x
    if not well.a < x < well.b:
        return PriceResult(price=0.0, terms_used=0)
    dt = drift_transform(r, sigma)
    width = well.width
    amp2 = 2.0 / width
    s2 = sigma * sigma
    u_k = contract.log_strike - well.a
    scale_spot = math.exp(well.a)
    pre = math.exp(-contract.tau * dt.gamma + dt.alpha * (x - well.a))
    contributions = []
    total = 0.0
    for n in range(1, SDB_MAX_TERMS + 1):
        if query.terms is not None and n > query.terms:
            break
        k = n * math.pi / width
        decay = math.exp(-0.5 * contract.tau * s2 * k * k)
        payoff = scale_spot * trig_exp_integral("odd_function", 1.0 - dt.alpha, k, u_k, width)
        payoff -= contract.strike * trig_exp_integral("odd_function", -dt.alpha, k, u_k, width)
        term = pre * decay * amp2 * math.sin(k * (x - well.a)) * payoff
        contributions.append(term)
        total += term
        if decay == 0.0 or (n > 2 and abs(term) <= SDB_REL_TOL * abs(total)):
            break
    return PriceResult(price=float(math.fsum(contributions)), terms_used=len(contributions),
                       contributions=tuple(contributions))
