"""Run configuration: a flat ``section.key = value`` text format, plus the
figure presets.

Example::

    # linear-rate preset, V0 = 55.7859
    well.a = 4.5
    well.b = 4.867
    well.v0 = 55.7859
    curves.r = affine:0.05,0.01
    curves.sigma = const:0.3
    query.s0 = 100:130:21
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .curves import ParamCurve
from .errors import ConfigError, StepwellError
from .montecarlo import McConfig
from .pricing import Contract
from .timedep import DEFAULT_STEPS, EXACT, MODES
from .well import WellSpec

REF_A = 4.5
REF_B = 4.867
REF_V0 = (12.8233, 26.3401, 55.7859)
FIXED_RATE = 0.05
FIXED_SIGMA = 0.3

# published k1n for sigma = 0.3, a = 4.5, b = 4.867
REF_TABLE = {
    55.7859: (7.38515, 14.7215, 21.9384, 28.8819, 34.4789, 42.1887),
    26.3401: (6.94708, 13.7663, 20.1958, 25.0978),
    12.8233: (6.41782, 12.527),
}
REF_COUNTS = {55.7859: 5, 26.3401: 3, 12.8233: 2}

PRESETS = ("fig1", "fig2", "fig3")


@dataclass
class RunConfig:
    a: float = REF_A
    b: float = REF_B
    v0: float = REF_V0[2]
    strike: float = 100.0
    tau: float = 1.0
    r: ParamCurve = field(default_factory=lambda: ParamCurve.constant(FIXED_RATE))
    sigma: ParamCurve = field(default_factory=lambda: ParamCurve.constant(FIXED_SIGMA))
    s0: Tuple[float, ...] = (115.0,)
    n_steps: int = DEFAULT_STEPS
    mode: str = EXACT
    terms: Optional[int] = None
    engine: str = "auto"
    mc_paths: int = 400_000
    mc_steps_per_year: int = 4000
    mc_seed: int = 42
    mc_antithetic: bool = True
    csv: Optional[str] = None
    svg: Optional[str] = None

    def well(self) -> WellSpec:
        return WellSpec(self.a, self.b, self.v0)

    def contract(self) -> Contract:
        return Contract(self.strike, self.tau)

    def mc(self) -> McConfig:
        return McConfig(self.mc_paths, self.mc_steps_per_year, self.mc_seed, self.mc_antithetic)

    def validate(self) -> "RunConfig":
        try:
            self.well()
            self.contract()
            self.mc()
        except StepwellError as exc:
            raise ConfigError(str(exc)) from None
        if self.mode not in MODES:
            raise ConfigError(f"engine.mode must be one of {MODES}")
        if self.engine not in ("auto", "const", "td"):
            raise ConfigError("engine.kind must be auto, const or td")
        if not self.s0 or any(not s > 0 for s in self.s0):
            raise ConfigError("query.s0 needs positive prices")
        if any(b <= a for a, b in zip(self.s0, self.s0[1:])):
            raise ConfigError("query.s0 must be strictly increasing")
        return self


def _fmt_float(v: float) -> str:
    return repr(float(v))


def _parse_s0(text: str) -> Tuple[float, ...]:
    text = text.strip()
    if text.count(":") == 2:
        lo, hi, n = text.split(":")
        grid = np.linspace(float(lo), float(hi), int(n))
        return tuple(float(v) for v in grid)
    return tuple(float(v) for v in text.split(","))


def _fmt_s0(s0: Tuple[float, ...]) -> str:
    return ",".join(_fmt_float(v) for v in s0)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_int(text: str) -> Optional[int]:
    return None if text.strip().lower() in ("", "none", "all") else int(text)


def _opt_str(text: str) -> Optional[str]:
    return None if text.strip().lower() in ("", "none") else text.strip()


# key -> (attribute, parser, formatter)
_FIELDS = {
    "well.a": ("a", float, _fmt_float),
    "well.b": ("b", float, _fmt_float),
    "well.v0": ("v0", float, _fmt_float),
    "contract.strike": ("strike", float, _fmt_float),
    "contract.tau": ("tau", float, _fmt_float),
    "curves.r": ("r", ParamCurve.parse, ParamCurve.to_text),
    "curves.sigma": ("sigma", ParamCurve.parse, ParamCurve.to_text),
    "query.s0": ("s0", _parse_s0, _fmt_s0),
    "engine.kind": ("engine", str.strip, str),
    "engine.n_steps": ("n_steps", int, str),
    "engine.mode": ("mode", str.strip, str),
    "engine.terms": ("terms", _opt_int, lambda v: "all" if v is None else str(v)),
    "mc.paths": ("mc_paths", int, str),
    "mc.steps_per_year": ("mc_steps_per_year", int, str),
    "mc.seed": ("mc_seed", int, str),
    "mc.antithetic": ("mc_antithetic", _parse_bool, lambda v: "true" if v else "false"),
    "output.csv": ("csv", _opt_str, lambda v: "none" if v is None else v),
    "output.svg": ("svg", _opt_str, lambda v: "none" if v is None else v),
}


def apply_setting(cfg: RunConfig, key: str, value: str, where: str = "") -> None:
    if key not in _FIELDS:
        raise ConfigError(f"{where}unknown key {key!r}")
    attr, parse, _ = _FIELDS[key]
    try:
        setattr(cfg, attr, parse(value))
    except (ValueError, StepwellError) as exc:
        raise ConfigError(f"{where}bad value for {key}: {exc}") from None


def parse_config(text: str, base: Optional[RunConfig] = None, check: bool = True) -> RunConfig:
    cfg = dataclasses.replace(base) if base is not None else RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        apply_setting(cfg, key.strip(), value.strip(), where=f"line {lineno}: ")
    return cfg.validate() if check else cfg


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for key, (attr, _, fmt) in _FIELDS.items():
        lines.append(f"{key} = {fmt(getattr(cfg, attr))}")
    return "\n".join(lines) + "\n"


def load_config(path, base: Optional[RunConfig] = None, check: bool = True) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        return parse_config(text, base, check)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(serialize_config(cfg), encoding="utf-8")


def preset(name: str, v0: float = REF_V0[2]) -> RunConfig:
    """Figure presets: time-dependent curve of the figure at one V0."""
    grid = tuple(float(v) for v in np.linspace(100.0, 130.0, 21))
    base = RunConfig(v0=v0, s0=grid, engine="td")
    if name == "fig1":
        base.r = ParamCurve.affine(0.05, 0.01)
    elif name == "fig2":
        base.r = ParamCurve.exp_decay(0.04, 0.01)
    elif name == "fig3":
        base.sigma = ParamCurve.affine(0.3, 0.05)
    else:
        raise ConfigError(f"unknown preset {name!r}; expected one of {PRESETS}")
    return base


def fixed_counterpart(cfg: RunConfig) -> RunConfig:
    """The dashed-line comparison case: r = 0.05, sigma = 0.3 held fixed."""
    return dataclasses.replace(
        cfg, r=ParamCurve.constant(FIXED_RATE), sigma=ParamCurve.constant(FIXED_SIGMA), engine="const"
    )


def reference_k1_rows(v0: float) -> Optional[Tuple[float, ...]]:
    for key, row in REF_TABLE.items():
        if math.isclose(key, v0, rel_tol=1e-9):
            return row
    return None


def all_preset_configs() -> List[RunConfig]:
    return [preset(name, v0) for name in PRESETS for v0 in REF_V0]


def preset_map() -> Dict[str, RunConfig]:
    return {f"{name}@{v0}": preset(name, v0) for name in PRESETS for v0 in REF_V0}
