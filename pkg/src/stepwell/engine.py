"""Dispatch a RunConfig to the constant or time-dependent pricer."""

from __future__ import annotations

import math

from .config import RunConfig
from .pricing import PriceQuery, PriceResult, price_const
from .timedep import price_td


def use_td(cfg: RunConfig) -> bool:
    if cfg.engine == "auto":
        return not (cfg.r.is_constant and cfg.sigma.is_constant)
    return cfg.engine == "td"


def price_config(cfg: RunConfig, s0: float) -> PriceResult:
    query = PriceQuery(math.log(s0), cfg.terms)
    if use_td(cfg):
        return price_td(cfg.well(), cfg.contract(), cfg.r, cfg.sigma, query, cfg.n_steps, cfg.mode)
    if not (cfg.r.is_constant and cfg.sigma.is_constant):
        raise ValueError("engine.kind = const needs constant curves")
    return price_const(cfg.well(), cfg.contract(), cfg.r(0.0), cfg.sigma(0.0), query)
