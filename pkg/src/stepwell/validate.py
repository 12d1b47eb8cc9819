"""Acceptance suite shared by ``stepwell validate`` and the test-suite."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np
from scipy.stats import norm

from .config import REF_A, REF_B, REF_COUNTS, REF_TABLE, REF_V0, RunConfig
from .curves import ParamCurve
from .montecarlo import McConfig, simulate_prices
from .pricing import (
    Contract,
    DivergentTailWarning,
    PriceQuery,
    drift_transform,
    kernel_const,
    price_const,
    price_sdb_limit,
)
from .quadrature import overlap, panel_nodes, tail_overlap
from .timedep import (
    APPROX,
    EXP_RATE,
    LINEAR_RATE,
    LINEAR_VOL,
    accumulate_td,
    closed_form_case,
    price_td,
)
from .well import WellSpec, build_spectrum, count_bound_states, eval_wavefunction, level_function

SIGMA = 0.3
RATE = 0.05
CONTRACT = Contract(100.0, 1.0)
MC_SPOTS = (105.0, 115.0, 125.0)
ORDER_GRID = tuple(float(v) for v in np.linspace(100.0, 130.0, 21))

# criterion name -> default tolerance
TOLERANCES: Dict[str, float] = {
    "table1": 5e-3,
    "bound_counts": 0.0,
    "orthonormality_ck": 1e-8,
    "mc_const": 0.02,
    "mc_linear_rate": 0.025,
    "orderings": 0.0,
    "closed_form_linear_rate": 1e-6,
    "closed_form_exp_rate": 1e-6,
    "closed_form_linear_vol": 1e-10,
    "sdb_limit": 5e-3,
    "mc_selfcheck": 3.0,
}

BUDGETS = {
    "table1": 1.0,
    "bound_counts": 1.0,
    "orthonormality_ck": 10.0,
    "mc_const": 120.0,
    "mc_linear_rate": 120.0,
    "orderings": 30.0,
    "closed_form_linear_rate": 10.0,
    "closed_form_exp_rate": 10.0,
    "closed_form_linear_vol": 10.0,
    "sdb_limit": 5.0,
    "mc_selfcheck": 60.0,
}

CRITERION = {
    "table1": 1,
    "bound_counts": 2,
    "orthonormality_ck": 3,
    "mc_const": 4,
    "mc_linear_rate": 5,
    "orderings": 6,
    "closed_form_linear_rate": 7,
    "closed_form_exp_rate": 7,
    "closed_form_linear_vol": 7,
    "sdb_limit": 8,
    "mc_selfcheck": 9,
}

LINEAR_RATE_GAMMA = 0.1031019
EXP_RATE_GAMMA = 0.0463491
RIEMANN_NODES = 10**6


@dataclass
class CheckResult:
    name: str
    criterion: int
    passed: bool
    measured: float
    tolerance: float
    seconds: float = 0.0
    budget: float = 0.0
    detail: str = ""
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"[{flag}] #{self.criterion} {self.name}: measured={self.measured:.4g} "
            f"tol={self.tolerance:.4g} time={self.seconds:.2f}s/{self.budget:.0f}s  {self.detail}"
        )


def reference_well(v0: float) -> WellSpec:
    return WellSpec(REF_A, REF_B, v0)


def check_table1(tol: float) -> CheckResult:
    worst, worst_res, failures = 0.0, 0.0, []
    for v0, row in REF_TABLE.items():
        spec = build_spectrum(reference_well(v0), SIGMA)
        for lv, ref in zip(spec.levels, row):
            rel = abs(lv.k1 - ref) / ref
            res = abs(level_function(lv.k1, spec.well.width, spec.beta, lv.n))
            worst = max(worst, rel)
            worst_res = max(worst_res, res)
            if rel > tol:
                failures.append(f"V0={v0} n={lv.n}: k1={lv.k1:.6f} vs {ref} ({rel:.2%})")
    passed = not failures and worst_res < 1e-10
    detail = f"max residual {worst_res:.1e}" + ("; " + "; ".join(failures) if failures else "")
    return CheckResult("table1", 1, passed, worst, tol, detail=detail)


def check_bound_counts(tol: float) -> CheckResult:
    got = {v0: count_bound_states(reference_well(v0), SIGMA) for v0 in REF_V0}
    mismatch = max(abs(got[v0] - REF_COUNTS[v0]) for v0 in REF_V0)
    return CheckResult("bound_counts", 2, mismatch <= tol, float(mismatch), tol, detail=f"counts {got}")


def chapman_kolmogorov_error(well: WellSpec, r: float, sigma: float, tau1: float, tau2: float, n_grid: int = 10):
    """Sup over an (x, x') grid of |int P(x,u;t1) P(u,x';t2) du - P(x,x';t1+t2)|."""
    spec = build_spectrum(well, sigma)
    dt = drift_transform(r, sigma)
    xs = np.linspace(well.a - 0.1, well.b + 0.1, n_grid)
    u, w = panel_nodes(well.a, well.b)
    s2 = sigma * sigma
    lv = spec.levels
    phi_x = np.array([eval_wavefunction(l, well, xs) for l in lv])  # (levels, grid)
    tails = np.array([[tail_overlap(m, n) for n in lv] for m in lv])
    e1 = np.exp(-0.5 * tau1 * s2 * spec.k1**2)
    e2 = np.exp(-0.5 * tau2 * s2 * spec.k1**2)
    pref = math.exp(-(tau1 + tau2) * dt.gamma)
    worst = 0.0
    for i, x in enumerate(xs):
        left = kernel_const(well, dt, spec, x, u, tau1)  # (nodes,)
        for j, xp in enumerate(xs):
            right = kernel_const(well, dt, spec, u, xp, tau2)
            inside = float(np.dot(w, left * right))
            tail = pref * math.exp(dt.alpha * (x - xp)) * float((e1 * phi_x[:, i]) @ tails @ (e2 * phi_x[:, j]))
            direct = kernel_const(well, dt, spec, x, xp, tau1 + tau2)
            worst = max(worst, abs(inside + tail - direct))
    return worst


def check_orthonormality_ck(tol: float) -> CheckResult:
    worst_gram, worst_ck = 0.0, 0.0
    for v0 in REF_V0:
        spec = build_spectrum(reference_well(v0), SIGMA)
        for m in spec.levels:
            for n in spec.levels:
                g = overlap(m, n, spec.well)
                worst_gram = max(worst_gram, abs(g - (1.0 if m.n == n.n else 0.0)))
        worst_ck = max(worst_ck, chapman_kolmogorov_error(spec.well, RATE, SIGMA, 0.5, 0.5))
    worst = max(worst_gram, worst_ck)
    return CheckResult(
        "orthonormality_ck", 3, worst < tol, worst, tol, detail=f"gram {worst_gram:.1e}, CK {worst_ck:.1e}"
    )


def _mc_vs_spectral(name: str, crit: int, r_curve: ParamCurve, pricer: Callable, tol: float, cfg: McConfig):
    well = reference_well(55.7859)
    est = simulate_prices(well, CONTRACT, r_curve, ParamCurve.constant(SIGMA), MC_SPOTS, cfg)
    worst, parts, ok = 0.0, [], True
    rows = []
    for s0, e in zip(MC_SPOTS, est):
        p = pricer(well, s0)
        rel = abs(p - e.mean) / e.mean
        allowed = max(3.0 * e.std_err, tol * e.mean)
        ok &= abs(p - e.mean) <= allowed
        worst = max(worst, rel)
        parts.append(f"S0={s0:g}: {p:.5f} vs {e.mean:.5f}+-{e.std_err:.5f}")
        rows.append({"s0": s0, "spectral": p, "mc": e.mean, "stderr": e.std_err})
    return CheckResult(name, crit, ok, worst, tol, detail="; ".join(parts), data={"rows": rows})


def check_mc_const(tol: float, cfg: Optional[McConfig] = None) -> CheckResult:
    cfg = cfg or McConfig(400_000, 4000, 42, True)
    return _mc_vs_spectral(
        "mc_const",
        4,
        ParamCurve.constant(RATE),
        lambda w, s0: price_const(w, CONTRACT, RATE, SIGMA, PriceQuery.from_spot(s0)).price,
        tol,
        cfg,
    )


def check_mc_linear_rate(tol: float, cfg: Optional[McConfig] = None) -> CheckResult:
    cfg = cfg or McConfig(400_000, 4000, 43, True)
    curve = ParamCurve.affine(0.05, 0.01)
    return _mc_vs_spectral(
        "mc_linear_rate",
        5,
        curve,
        lambda w, s0: price_td(w, CONTRACT, curve, ParamCurve.constant(SIGMA), PriceQuery.from_spot(s0)).price,
        tol,
        cfg,
    )


def check_orderings(tol: float) -> CheckResult:
    sig = ParamCurve.constant(SIGMA)
    curves = {
        "fixed": None,
        "linear_rate": ParamCurve.affine(0.05, 0.01),
        "exp_rate": ParamCurve.exp_decay(0.04, 0.01),
    }
    prices = {}
    for v0 in REF_V0:
        well = reference_well(v0)
        for key, rc in curves.items():
            if rc is None:
                vals = [price_const(well, CONTRACT, RATE, SIGMA, PriceQuery.from_spot(s)).price for s in ORDER_GRID]
            else:
                vals = [price_td(well, CONTRACT, rc, sig, PriceQuery.from_spot(s)).price for s in ORDER_GRID]
            prices[key, v0] = np.array(vals)
    violations = []
    for key in curves:
        for lo, hi in zip(REF_V0, REF_V0[1:]):
            bad = int(np.sum(prices[key, hi] > prices[key, lo] + tol))
            if bad:
                violations.append(f"{key}: V0={hi} above V0={lo} at {bad} points")
    for v0 in REF_V0:
        bad = int(np.sum(prices["linear_rate", v0] < prices["fixed", v0] - tol))
        if bad:
            violations.append(f"linear_rate below fixed at V0={v0} ({bad} points)")
        bad = int(np.sum(prices["exp_rate", v0] > prices["fixed", v0] + tol))
        if bad:
            violations.append(f"exp_rate above fixed at V0={v0} ({bad} points)")
    n_bad = len(violations)
    detail = "; ".join(violations) if violations else f"{len(ORDER_GRID)}-point grid, 3 potentials, 0 violations"
    return CheckResult("orderings", 6, n_bad == 0, float(n_bad), tol, detail=detail)


def _riemann_gamma(r_curve: ParamCurve, sigma: float, tau: float, nodes: int) -> float:
    t = np.arange(nodes) * (tau / nodes)
    g = (0.5 * sigma * sigma + r_curve(t)) ** 2 / (2.0 * sigma * sigma)
    return math.fsum(g) * (tau / nodes)


def check_closed_form_rate(case: str, target: float, tol: float) -> CheckResult:
    well = reference_well(55.7859)
    r_curve = ParamCurve.affine(0.05, 0.01) if case == LINEAR_RATE else ParamCurve.exp_decay(0.04, 0.01)
    gamma = closed_form_case(case, well, 1.0).big_gamma
    riemann = _riemann_gamma(r_curve, SIGMA, 1.0, RIEMANN_NODES)
    err_target = abs(gamma - target)
    err_riemann = abs(gamma - riemann)
    name = f"closed_form_{case}"
    return CheckResult(
        name,
        7,
        err_target <= tol and err_riemann <= tol,
        max(err_target, err_riemann),
        tol,
        detail=f"closed form {gamma:.7f}, target {target}, 1e6-node sum {riemann:.7f}",
    )


def check_closed_form_linear_vol(tol: float, n_steps: int = 1000) -> CheckResult:
    worst = 0.0
    for v0 in REF_V0:
        well = reference_well(v0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            direct = accumulate_td(ParamCurve.constant(RATE), ParamCurve.affine(0.3, 0.05), well, 1.0, n_steps, APPROX)
        closed = closed_form_case(LINEAR_VOL, well, 1.0, n_steps=n_steps)
        pairs = list(zip(direct.lambdas, closed.lambdas)) + [(direct.big_gamma, closed.big_gamma)]
        if len(direct.lambdas) != len(closed.lambdas):
            worst = math.inf
        for d, c in pairs:
            worst = max(worst, abs(d - c) / abs(d))
    return CheckResult("closed_form_linear_vol", 7, worst <= tol, worst, tol, detail=f"N={n_steps}, 3 potentials")


def check_sdb_limit(tol: float) -> CheckResult:
    well = reference_well(1e6)
    q = PriceQuery.from_spot(115.0)
    p = price_const(well, CONTRACT, RATE, SIGMA, q).price
    s = price_sdb_limit(well, CONTRACT, RATE, SIGMA, q).price
    rel = abs(p - s) / s
    return CheckResult("sdb_limit", 8, rel <= tol, rel, tol, detail=f"V0=1e6: {p:.6f} vs SDB {s:.6f}")


def black_scholes_call(s0: float, strike: float, r: float, sigma: float, tau: float) -> float:
    sd = sigma * math.sqrt(tau)
    d1 = (math.log(s0 / strike) + (r + 0.5 * sigma * sigma) * tau) / sd
    return s0 * norm.cdf(d1) - strike * math.exp(-r * tau) * norm.cdf(d1 - sd)


def check_mc_selfcheck(tol: float) -> CheckResult:
    # v0 = 1e-300 makes the step damping exactly 1.0 in double precision
    free = WellSpec(REF_A, REF_B, 1e-300)
    est = simulate_prices(
        free, CONTRACT, ParamCurve.constant(RATE), ParamCurve.constant(SIGMA), [115.0], McConfig(400_000, 250, 7, True)
    )[0]
    ref = black_scholes_call(115.0, CONTRACT.strike, RATE, SIGMA, CONTRACT.tau)
    z = abs(est.mean - ref) / est.std_err
    small = McConfig(8192, 250, 11, True)
    args = (reference_well(55.7859), CONTRACT, ParamCurve.constant(RATE), ParamCurve.constant(SIGMA), MC_SPOTS, small)
    one = simulate_prices(*args, workers=1)
    eight = simulate_prices(*args, workers=8)
    same = all(a.mean == b.mean and a.std_err == b.std_err for a, b in zip(one, eight))
    return CheckResult(
        "mc_selfcheck",
        9,
        z <= tol and same,
        z,
        tol,
        detail=f"vanilla {est.mean:.5f}+-{est.std_err:.5f} vs BS {ref:.5f}; 1 vs 8 workers identical={same}",
    )


CHECKS: Dict[str, Callable[[float], CheckResult]] = {
    "table1": check_table1,
    "bound_counts": check_bound_counts,
    "orthonormality_ck": check_orthonormality_ck,
    "mc_const": check_mc_const,
    "mc_linear_rate": check_mc_linear_rate,
    "orderings": check_orderings,
    "closed_form_linear_rate": lambda tol: check_closed_form_rate(LINEAR_RATE, LINEAR_RATE_GAMMA, tol),
    "closed_form_exp_rate": lambda tol: check_closed_form_rate(EXP_RATE, EXP_RATE_GAMMA, tol),
    "closed_form_linear_vol": check_closed_form_linear_vol,
    "sdb_limit": check_sdb_limit,
    "mc_selfcheck": check_mc_selfcheck,
}


def run_check(name: str, tolerance: Optional[float] = None) -> CheckResult:
    tol = TOLERANCES[name] if tolerance is None else tolerance
    start = time.perf_counter()
    res = CHECKS[name](tol)
    res.seconds = time.perf_counter() - start
    res.budget = BUDGETS[name]
    if res.seconds > res.budget:
        res.passed = False
        res.detail += f"; over runtime budget ({res.seconds:.1f}s > {res.budget:.0f}s)"
    return res


def config_diagnostics(cfg: RunConfig) -> List[dict]:
    """Divergent-tail levels dropped while pricing the config's spot grid."""
    from .engine import price_config

    dropped = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DivergentTailWarning)
        for s0 in cfg.s0:
            res = price_config(cfg, s0)
            for n, k2 in res.dropped:
                dropped.append({"s0": s0, "n": n, "k2": k2})
    return dropped


@dataclass
class Report:
    checks: List[CheckResult]
    dropped_terms: List[dict]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
            "dropped_terms": self.dropped_terms,
        }


def run_suite(
    names: Optional[Iterable[str]] = None,
    tolerance_overrides: Optional[Dict[str, float]] = None,
    cfg: Optional[RunConfig] = None,
    echo: Optional[Callable[[str], None]] = None,
) -> Report:
    names = list(CHECKS) if names is None else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {unknown}")
    overrides = tolerance_overrides or {}
    results = []
    for name in names:
        res = run_check(name, overrides.get(name))
        if echo:
            echo(res.line())
        results.append(res)
    dropped = config_diagnostics(cfg) if cfg is not None else []
    return Report(results, dropped)
