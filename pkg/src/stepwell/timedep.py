"""Time-sliced pricing kernel for deterministic r(t) and sigma(t).

The maturity is cut into N slices of length eps = tau/N.  Collapsing the
product of one-slice propagators with the orthonormality of the bound
states leaves

    P(x, x') = e^{alpha_0 (x-c) - alpha_N (x'-c)} e^{-Gamma}
               * sum_n e^{-Lambda_n / 2} phi_n(x) phi_n(x')

with Gamma = eps sum_j gamma(t_j) and Lambda_n = eps sum_j sigma_j^2 k1n(t_j)^2
(left Riemann sums over t_j = j eps, j = 0..N-1).  The drift tilt is taken
about the corridor centre c; with constant curves the tilt reduces to
alpha (x - x') and the kernel is the constant-parameter one exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from . import special
from .curves import AFFINE, EXP_DECAY, ParamCurve, require_positive
from .errors import DomainError, NoBoundStatesError, StepwellError
from .pricing import (
    Contract,
    PriceQuery,
    PriceResult,
    check_strike,
    drift_transform,
    expansion_price,
)
from .well import (
    Spectrum,
    WellSpec,
    _solve_k1,
    approx_level_low_energy,
    build_spectrum,
    compute_beta,
    count_bound_states,
    eval_wavefunction,
)

EXACT = "exact_eigen"
APPROX = "paper_approx"
MODES = (EXACT, APPROX)
DEFAULT_STEPS = 1000
MIN_STEPS = 100

LINEAR_RATE = "linear_rate"
EXP_RATE = "exp_rate"
LINEAR_VOL = "linear_vol"
CASES = (LINEAR_RATE, EXP_RATE, LINEAR_VOL)

CASE_DEFAULTS = {
    LINEAR_RATE: (ParamCurve.affine(0.05, 0.01), ParamCurve.constant(0.3)),
    EXP_RATE: (ParamCurve.exp_decay(0.04, 0.01), ParamCurve.constant(0.3)),
    LINEAR_VOL: (ParamCurve.constant(0.05), ParamCurve.affine(0.3, 0.05)),
}


class LevelUnbindingWarning(RuntimeWarning):
    """Some bound state disappears at a later time node and was dropped."""


@dataclass(frozen=True)
class TimeGrid:
    n_steps: int
    eps: float
    nodes: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def build(cls, tau: float, n_steps: int) -> "TimeGrid":
        if not tau > 0:
            raise DomainError(f"tau must be positive, got {tau}")
        if n_steps < 1:
            raise DomainError(f"n_steps must be >= 1, got {n_steps}")
        eps = tau / n_steps
        return cls(n_steps, eps, np.arange(n_steps + 1) * eps)


@dataclass(frozen=True)
class TdAccumulators:
    big_gamma: float
    lambdas: Tuple[float, ...]
    alpha0: float
    alphaN: float


def _alpha(r: float, sigma: float) -> float:
    return drift_transform(r, sigma).alpha


def accumulate_td(
    r_curve: ParamCurve,
    sigma_curve: ParamCurve,
    well: WellSpec,
    tau: float,
    n_steps: int = DEFAULT_STEPS,
    mode: str = EXACT,
) -> TdAccumulators:
    """Riemann-sum the drift shift and per-level decay exponents."""
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}; expected one of {MODES}")
    if n_steps < MIN_STEPS:
        raise DomainError(f"n_steps must be >= {MIN_STEPS}, got {n_steps}")
    require_positive(sigma_curve, tau)
    require_positive(r_curve, tau, "rate")
    grid = TimeGrid.build(tau, n_steps)
    t = grid.nodes[:-1]
    sig = np.broadcast_to(np.asarray(sigma_curve(t), dtype=float), t.shape)
    rate = np.broadcast_to(np.asarray(r_curve(t), dtype=float), t.shape)

    gammas = (0.5 * sig * sig + rate) ** 2 / (2.0 * sig * sig)
    big_gamma = grid.eps * math.fsum(gammas)

    # eigenvalues depend on time only through sigma; solve once per distinct value
    cache: Dict[float, Tuple[int, np.ndarray]] = {}
    counts = np.empty(len(t), dtype=int)
    for j, s in enumerate(sig):
        s = float(s)
        if s not in cache:
            n_lv = count_bound_states(well, s)
            if n_lv == 0:
                raise NoBoundStatesError(f"no bound states at node j={j} (t={t[j]:.6g}, sigma={s:.6g})")
            if mode == EXACT:
                beta = compute_beta(well, s)
                ks = np.array([_solve_k1(well.width, beta, n) for n in range(1, n_lv + 1)])
            else:
                ks = np.array([approx_level_low_energy(well, s, n) for n in range(1, n_lv + 1)])
            cache[s] = (n_lv, ks)
        counts[j] = cache[s][0]
    n_keep = int(counts.min())
    if n_keep < counts[0]:
        warnings.warn(
            f"levels {n_keep + 1}..{counts[0]} unbind before maturity and are dropped",
            LevelUnbindingWarning,
            stacklevel=2,
        )
    terms = np.empty((len(t), n_keep))
    for j, s in enumerate(sig):
        ks = cache[float(s)][1][:n_keep]
        terms[j] = (s * ks) ** 2
    lambdas = tuple(grid.eps * math.fsum(terms[:, n]) for n in range(n_keep))
    return TdAccumulators(
        big_gamma=big_gamma,
        lambdas=lambdas,
        alpha0=_alpha(r_curve(0.0), sigma_curve(0.0)),
        alphaN=_alpha(r_curve(tau), sigma_curve(tau)),
    )


def _poly_sums(n: int):
    """sum j and sum j^2 for j = 0..n-1."""
    return n * (n - 1) / 2.0, (n - 1) * n * (2 * n - 1) / 6.0


def closed_form_case(
    case_id: str,
    well: WellSpec,
    tau: float,
    r_curve: Optional[ParamCurve] = None,
    sigma_curve: Optional[ParamCurve] = None,
    n_steps: int = DEFAULT_STEPS,
) -> TdAccumulators:
    """Analytic accumulators for the three worked curve families.

    ``linear_rate`` and ``exp_rate`` give the eps -> 0 limits with the
    low-energy wavenumbers.  ``linear_vol`` gives the finite-N sums through
    digamma/trigamma differences, matching ``accumulate_td(mode=APPROX)`` at
    the same ``n_steps``.
    """
    if case_id not in CASES:
        raise StepwellError(f"unknown case {case_id!r}; expected one of {CASES}")
    r_def, s_def = CASE_DEFAULTS[case_id]
    r_curve = r_curve or r_def
    sigma_curve = sigma_curve or s_def
    n_lv = count_bound_states(well, sigma_curve.min_on(0.0, tau) if case_id != LINEAR_VOL else sigma_curve(tau))
    alpha0 = _alpha(r_curve(0.0), sigma_curve(0.0))
    alphaN = _alpha(r_curve(tau), sigma_curve(tau))

    if case_id in (LINEAR_RATE, EXP_RATE):
        if not sigma_curve.is_constant:
            raise DomainError(f"{case_id} needs a constant volatility")
        want = AFFINE if case_id == LINEAR_RATE else EXP_DECAY
        if r_curve.variant != want:
            raise DomainError(f"{case_id} needs a {want} rate curve")
        s = sigma_curve.c0
        q = 0.5 * s * s + r_curve.c0
        r1 = r_curve.c1
        if case_id == LINEAR_RATE:
            # (q + r1 t)^2 integrated over [0, tau]
            integral = q * q * tau + q * r1 * tau**2 + r1 * r1 * tau**3 / 3.0
        else:
            integral = q * q * tau + 2.0 * q * r1 * (1.0 - math.exp(-tau)) + 0.5 * r1 * r1 * (
                1.0 - math.exp(-2.0 * tau)
            )
        big_gamma = integral / (2.0 * s * s)
        n_lv = count_bound_states(well, s)
        lambdas = tuple(
            s * s * approx_level_low_energy(well, s, n) ** 2 * tau for n in range(1, n_lv + 1)
        )
        return TdAccumulators(big_gamma, lambdas, alpha0, alphaN)

    # linear volatility sigma = s0 + s1 t with constant rate
    if sigma_curve.variant != AFFINE or sigma_curve.c1 == 0.0:
        raise DomainError("linear_vol needs an affine volatility with nonzero slope")
    if not r_curve.is_constant:
        raise DomainError("linear_vol needs a constant rate")
    if n_steps < MIN_STEPS:
        raise DomainError(f"n_steps must be >= {MIN_STEPS}, got {n_steps}")
    require_positive(sigma_curve, tau)
    s0, s1 = sigma_curve.c0, sigma_curve.c1
    r = r_curve.c0
    eps = tau / n_steps
    sum_j, sum_j2 = _poly_sums(n_steps)
    sum_sig2 = eps * (n_steps * s0 * s0 + 2.0 * s0 * s1 * eps * sum_j + s1 * s1 * eps * eps * sum_j2)
    # eps sum 1/sigma_j^2 = (1/(s1^2 eps)) sum 1/(j + s0/(s1 eps))^2
    sum_inv_sig2 = special.inverse_square_shift(s0 / (s1 * eps), n_steps) / (s1 * s1 * eps)
    big_gamma = sum_sig2 / 8.0 + 0.5 * r * tau + 0.5 * r * r * sum_inv_sig2

    # sigma^2 k_low^2 = 2 v0 n^2 pi^2 [1/4 - q/(2u) + q^2/(4u^2)], u = q + 2 sigma
    qw = math.sqrt(2.0 * well.v0) * well.width
    z = (qw + 2.0 * s0) / (2.0 * s1 * eps)
    h1 = special.harmonic_shift(z, n_steps)
    h2 = special.inverse_square_shift(z, n_steps)
    bracket = eps * n_steps / 4.0 - qw / (4.0 * s1) * h1 + qw * qw / (16.0 * s1 * s1 * eps) * h2
    counts = [count_bound_states(well, float(sigma_curve(j * eps))) for j in (0, n_steps - 1)]
    n_lv = min(counts)
    lambdas = tuple(2.0 * well.v0 * (n * math.pi) ** 2 * bracket for n in range(1, n_lv + 1))
    return TdAccumulators(big_gamma, lambdas, alpha0, alphaN)


def kernel_td(acc: TdAccumulators, spectrum_ref: Spectrum, x, x_prime):
    """Time-dependent pricing kernel on the t = 0 eigenbasis."""
    n_lv = len(acc.lambdas)
    if n_lv == 0:
        raise NoBoundStatesError("accumulators carry no levels")
    if n_lv > len(spectrum_ref.levels):
        raise StepwellError(
            f"level-count mismatch: {n_lv} accumulated levels, spectrum has {len(spectrum_ref.levels)}"
        )
    well = spectrum_ref.well
    c = well.center
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    total = 0.0
    for level, lam in zip(spectrum_ref.levels, acc.lambdas):
        total = total + math.exp(-0.5 * lam) * eval_wavefunction(level, well, x) * eval_wavefunction(
            level, well, x_prime
        )
    out = math.exp(-acc.big_gamma) * np.exp(acc.alpha0 * (x - c) - acc.alphaN * (x_prime - c)) * total
    return out if np.ndim(out) else float(out)


def price_td(
    well: WellSpec,
    contract: Contract,
    r_curve: ParamCurve,
    sigma_curve: ParamCurve,
    query: PriceQuery,
    n_steps: int = DEFAULT_STEPS,
    mode: str = EXACT,
    tail_margin: float = 0.0,
) -> PriceResult:
    check_strike(well, contract.strike)
    acc = accumulate_td(r_curve, sigma_curve, well, contract.tau, n_steps, mode)
    spectrum = build_spectrum(well, float(sigma_curve(0.0)))
    weights = [math.exp(-0.5 * lam) for lam in acc.lambdas]
    res = expansion_price(
        spectrum,
        contract.strike,
        query.x,
        math.exp(-acc.big_gamma),
        weights,
        acc.alpha0,
        acc.alphaN,
        terms=query.terms,
        tail_margin=tail_margin,
    )
    res.extras.update(big_gamma=acc.big_gamma, lambdas=acc.lambdas, n_steps=n_steps, mode=mode)
    return res
