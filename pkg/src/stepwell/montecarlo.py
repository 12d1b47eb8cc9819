"""Monte Carlo reference pricer for proportional step double-barrier calls.

Log-price follows dx = (r(t) - sigma(t)^2/2) dt + sigma(t) dW, stepped on a
uniform grid with midpoint coefficients (exact when r and sigma are constant).  Time spent outside (a, b) is accumulated with
the left-endpoint rule and the payoff is

    exp(-int r dt) * exp(-v0 * tau_outside) * max(S_T - K, 0).

Paths are processed in fixed-size blocks, each with its own counter-based
(Philox) stream keyed by (seed, block index), and block results are reduced
in block order.  The estimate therefore does not depend on the number of
worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .curves import ParamCurve, require_positive
from .errors import ConfigError
from .pricing import Contract
from .well import WellSpec

BLOCK_PATHS = 4096
CHUNK_STEPS = 256
THREADS_ENV = "STEPWELL_THREADS"


@dataclass(frozen=True)
class McConfig:
    paths: int = 400_000
    steps_per_year: int = 4000
    seed: int = 42
    antithetic: bool = True

    def __post_init__(self):
        if self.paths < 1000:
            raise ConfigError(f"paths must be >= 1000, got {self.paths}")
        if self.steps_per_year < 250:
            raise ConfigError(f"steps_per_year must be >= 250, got {self.steps_per_year}")
        if self.antithetic and self.paths % 2:
            raise ConfigError("antithetic sampling needs an even path count")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McPathStats:
    tau_inside: np.ndarray
    tau_outside: np.ndarray
    terminal_log_price: np.ndarray


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_err: float
    ci95: Tuple[float, float]
    paths_used: int

    @classmethod
    def from_moments(cls, mean: float, std_err: float, paths: int) -> "McEstimate":
        half = 1.96 * std_err
        return cls(mean, std_err, (mean - half, mean + half), paths)


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError(f"{THREADS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


class _Grid:
    """Per-step drift and diffusion increments on the uniform time grid."""

    def __init__(self, r_curve: ParamCurve, sigma_curve: ParamCurve, tau: float, steps_per_year: int):
        self.n_steps = max(1, int(round(steps_per_year * tau)))
        self.dt = tau / self.n_steps
        mid = (np.arange(self.n_steps) + 0.5) * self.dt
        sig = np.asarray(sigma_curve(mid), dtype=float) * np.ones(self.n_steps)
        rate = np.asarray(r_curve(mid), dtype=float) * np.ones(self.n_steps)
        self.drift = (rate - 0.5 * sig * sig) * self.dt
        self.vol = sig * math.sqrt(self.dt)
        self.discount = math.exp(-r_curve.integral(0.0, tau))


def _block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def _simulate_block(
    grid: _Grid, well: WellSpec, x0s: np.ndarray, n_paths: int, seed: int, block: int, antithetic: bool
):
    """Outside-step counts (len(x0s), n_paths) and terminal increments (n_paths,)."""
    rng = _block_rng(seed, block)
    n_draw = n_paths // 2 if antithetic else n_paths
    lo = well.a - x0s[:, None]  # path is outside when y <= lo or y >= hi, y = x - x0
    hi = well.b - x0s[:, None]
    y = np.zeros(n_paths)
    n_out = np.zeros((len(x0s), n_paths), dtype=np.int64)
    for start in range(0, grid.n_steps, CHUNK_STEPS):
        stop = min(start + CHUNK_STEPS, grid.n_steps)
        z = rng.standard_normal((stop - start, n_draw))
        if antithetic:
            z = np.concatenate([z, -z], axis=1)
        inc = grid.drift[start:stop, None] + grid.vol[start:stop, None] * z
        path = np.cumsum(inc, axis=0)
        path += y
        # left endpoint: state at the start of each step
        before = np.empty_like(path)
        before[0] = y
        before[1:] = path[:-1]
        for i in range(len(x0s)):
            out = (before <= lo[i, 0]) | (before >= hi[i, 0])
            n_out[i] += out.sum(axis=0)
        y = path[-1].copy()
    return n_out, y


def _blocks(n_paths: int) -> List[Tuple[int, int]]:
    return [(b, min(BLOCK_PATHS, n_paths - b * BLOCK_PATHS)) for b in range(-(-n_paths // BLOCK_PATHS))]


def sample_paths(
    well: WellSpec, contract: Contract, r_curve: ParamCurve, sigma_curve: ParamCurve, s0: float, cfg: McConfig
) -> McPathStats:
    """Per-path occupation times and terminal log-prices (for diagnostics)."""
    grid = _Grid(r_curve, sigma_curve, contract.tau, cfg.steps_per_year)
    x0 = math.log(s0)
    t_in, t_out, x_t = [], [], []
    for block, n in _blocks(cfg.paths):
        n_out, y = _simulate_block(grid, well, np.array([x0]), n, cfg.seed, block, cfg.antithetic)
        t_out.append(n_out[0] * grid.dt)
        t_in.append((grid.n_steps - n_out[0]) * grid.dt)
        x_t.append(x0 + y)
    return McPathStats(np.concatenate(t_in), np.concatenate(t_out), np.concatenate(x_t))


def simulate_prices(
    well: WellSpec,
    contract: Contract,
    r_curve: ParamCurve,
    sigma_curve: ParamCurve,
    s0s: Sequence[float],
    cfg: McConfig,
    workers: int | None = None,
) -> List[McEstimate]:
    """Estimates for several spot prices sharing the same Brownian paths."""
    require_positive(sigma_curve, contract.tau)
    s0s = [float(s) for s in s0s]
    if any(not s > 0 for s in s0s):
        raise ConfigError("spot prices must be positive")
    grid = _Grid(r_curve, sigma_curve, contract.tau, cfg.steps_per_year)
    x0s = np.log(np.array(s0s))
    workers = workers or default_workers()

    def run(job):
        block, n = job
        n_out, y = _simulate_block(grid, well, x0s, n, cfg.seed, block, cfg.antithetic)
        terminal = np.exp(x0s[:, None] + y[None, :])
        vals = grid.discount * np.exp(-well.v0 * grid.dt * n_out) * np.maximum(terminal - contract.strike, 0.0)
        if cfg.antithetic:
            half = n // 2
            vals = 0.5 * (vals[:, :half] + vals[:, half:])
        return vals.sum(axis=1), (vals * vals).sum(axis=1), vals.shape[1]

    jobs = _blocks(cfg.paths)
    if workers == 1:
        results = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    total = np.zeros(len(s0s))
    total_sq = np.zeros(len(s0s))
    count = 0
    for s, sq, m in results:  # fixed block order
        total += s
        total_sq += sq
        count += m
    mean = total / count
    var = np.maximum(total_sq / count - mean * mean, 0.0) * count / (count - 1)
    err = np.sqrt(var / count)
    return [McEstimate.from_moments(float(m), float(e), cfg.paths) for m, e in zip(mean, err)]


def simulate_price(
    well: WellSpec,
    contract: Contract,
    r_curve: ParamCurve,
    sigma_curve: ParamCurve,
    s0: float,
    cfg: McConfig,
    workers: int | None = None,
) -> McEstimate:
    return simulate_prices(well, contract, r_curve, sigma_curve, [s0], cfg, workers)[0]


@dataclass(frozen=True)
class ConvergenceRow:
    steps_per_year: int
    estimate: McEstimate


def convergence_study(
    well: WellSpec,
    contract: Contract,
    r_curve: ParamCurve,
    sigma_curve: ParamCurve,
    s0: float,
    cfg: McConfig,
    step_ladder: Sequence[int],
    workers: int | None = None,
) -> List[ConvergenceRow]:
    """Re-run the estimate at increasing monitoring frequencies."""
    ladder = list(step_ladder)
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("step ladder must be strictly increasing")
    rows = []
    for steps in ladder:
        c = McConfig(cfg.paths, steps, cfg.seed, cfg.antithetic)
        rows.append(ConvergenceRow(steps, simulate_price(well, contract, r_curve, sigma_curve, s0, c, workers)))
    return rows
