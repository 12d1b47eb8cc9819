"""Command-line interface.

    stepwell spectrum --v0 55.7859
    stepwell price --preset fig1 --s0 115 --mc
    stepwell sweep --preset fig2 --out results/ --svg
    stepwell validate --json report.json

Exit codes: 0 success, 1 validation failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
import warnings
from pathlib import Path
from typing import List, Optional, Sequence

from . import config as cfgmod
from .config import REF_V0, RunConfig
from .curves import ParamCurve
from .engine import price_config
from .errors import ConfigError, StepwellError, UnsupportedConfigurationError
from .montecarlo import simulate_prices
from .output import CurveRow, curve_csv_text, write_curve_csv, write_svg
from .pricing import DivergentTailWarning
from .well import build_spectrum, compute_beta

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="key = value config file")
    g.add_argument("--preset", help="fig1, fig2 or fig3 (sweep also accepts custom)")
    g.add_argument("--a", type=float, help="lower barrier (log-price)")
    g.add_argument("--b", type=float, help="upper barrier (log-price)")
    g.add_argument("--v0", type=float, help="step intensity / well depth")
    g.add_argument("--strike", type=float)
    g.add_argument("--tau", type=float)
    g.add_argument("--r", type=ParamCurve.parse, help="const:0.05 | affine:0.05,0.01 | expdecay:0.04,0.01")
    g.add_argument("--sigma", type=ParamCurve.parse, help="volatility curve, same syntax")
    g.add_argument("--s0", help="spot list '105,115' or range 'lo:hi:count'")
    g.add_argument("--n-steps", type=int, dest="n_steps")
    g.add_argument("--mode", choices=("exact_eigen", "paper_approx"))
    g.add_argument("--terms", type=int)
    g.add_argument("--engine", choices=("auto", "const", "td"))
    g.add_argument("--paths", type=int, help="Monte Carlo paths")
    g.add_argument("--steps-per-year", type=int, dest="steps_per_year")
    g.add_argument("--seed", type=int)
    g.add_argument("--no-antithetic", action="store_true")
    g.add_argument("--save-config", help="write the effective config and continue")


def build_config(args, preset_name: Optional[str] = None, v0: Optional[float] = None) -> RunConfig:
    name = preset_name if preset_name is not None else args.preset
    if name and name != "custom":
        cfg = cfgmod.preset(name, v0 if v0 is not None else REF_V0[2])
    else:
        cfg = RunConfig()
    if args.config:
        cfg = cfgmod.load_config(args.config, base=cfg, check=False)
    overrides = {
        "a": args.a,
        "b": args.b,
        "v0": args.v0 if v0 is None else None,
        "strike": args.strike,
        "tau": args.tau,
        "r": args.r,
        "sigma": args.sigma,
        "n_steps": args.n_steps,
        "mode": args.mode,
        "terms": args.terms,
        "engine": args.engine,
        "mc_paths": args.paths,
        "mc_steps_per_year": args.steps_per_year,
        "mc_seed": args.seed,
    }
    cfg = dataclasses.replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    if args.s0:
        cfg.s0 = cfgmod._parse_s0(args.s0)
    if args.no_antithetic:
        cfg.mc_antithetic = False
    if args.save_config:
        cfgmod.save_config(cfg, args.save_config)
    return cfg


def cmd_spectrum(args) -> int:
    cfg = build_config(args)
    if cfg.v0 <= 0:
        print(f"no bound states: V0 = {cfg.v0:g} leaves no well")
        return EXIT_OK
    cfg.validate()
    sigma = float(cfg.sigma(0.0))
    spec = build_spectrum(cfg.well(), sigma)
    if not spec.levels:
        print("no bound states")
        return EXIT_OK
    ref_rows = cfgmod.reference_k1_rows(cfg.v0) if math.isclose(sigma, 0.3) else None
    print(f"# a={cfg.a} b={cfg.b} V0={cfg.v0} sigma={sigma} beta={spec.beta:.6f} levels={len(spec)}")
    head = f"{'n':>3} {'k1n':>12} {'k2n':>12}  {'parity':<14}"
    if ref_rows:
        head += f" {'ref_k1n':>10} {'rel_diff':>9}"
    print(head)
    for lv in spec.levels:
        line = f"{lv.n:>3} {lv.k1:>12.6f} {lv.k2:>12.6f}  {lv.parity:<14}"
        if ref_rows and lv.n <= len(ref_rows):
            ref = ref_rows[lv.n - 1]
            line += f" {ref:>10g} {(lv.k1 - ref) / ref:>9.2%}"
        print(line)
    if ref_rows:
        beta = compute_beta(cfg.well(), sigma)
        for n, ref in enumerate(ref_rows, start=1):
            if n > len(spec):
                print(f"note: reference table lists n={n} with k1n={ref:g}, which exceeds beta={beta:.4f}; not a bound state")
    return EXIT_OK


def _rows(cfg: RunConfig, with_mc: bool) -> List[CurveRow]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DivergentTailWarning)
        results = [price_config(cfg, s0) for s0 in cfg.s0]
    mc = [None] * len(cfg.s0)
    if with_mc:
        mc = simulate_prices(cfg.well(), cfg.contract(), cfg.r, cfg.sigma, cfg.s0, cfg.mc())
    rows = []
    for s0, res, est in zip(cfg.s0, results, mc):
        rows.append(
            CurveRow(
                s0=s0,
                price_spectral=res.price,
                price_mc=None if est is None else est.mean,
                mc_stderr=None if est is None else est.std_err,
                n_terms=res.terms_used,
                dropped_terms=len(res.dropped),
            )
        )
    return rows


def cmd_price(args) -> int:
    cfg = build_config(args)
    if not args.s0 and len(cfg.s0) != 1:
        cfg.s0 = (115.0,)
    cfg.validate()
    rows = _rows(cfg, args.mc)
    sys.stdout.write(curve_csv_text(rows))
    return EXIT_OK


def _emit(rows, path: Path, svg: bool, title: str, dashed: bool) -> None:
    write_curve_csv(rows, path)
    print(f"wrote {path}")
    if svg:
        write_svg(rows, path.with_suffix(".svg"), title=title, dashed=dashed)
        print(f"wrote {path.with_suffix('.svg')}")


def cmd_sweep(args) -> int:
    name = args.preset or "custom"
    out = Path(args.out)
    if name == "custom":
        cfg = build_config(args).validate()
        target = Path(cfg.csv) if cfg.csv and not args.out_given else out
        if target.suffix != ".csv":
            target = target / "custom.csv"
        target.parent.mkdir(parents=True, exist_ok=True)
        _emit(_rows(cfg, args.mc), target, args.svg, f"V0={cfg.v0}", dashed=False)
        return EXIT_OK
    if name not in cfgmod.PRESETS:
        raise ConfigError(f"unknown preset {name!r}")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create {out}: {exc}") from None
    for v0 in REF_V0:
        cfg = build_config(args, name, v0).validate()
        fixed = cfgmod.fixed_counterpart(cfg)
        _emit(_rows(cfg, args.mc), out / f"{name}_v{v0:g}_td.csv", args.svg, f"{name} V0={v0:g}", False)
        _emit(_rows(fixed, args.mc), out / f"{name}_v{v0:g}_fixed.csv", args.svg, f"{name} fixed V0={v0:g}", True)
    return EXIT_OK


def _parse_overrides(items: Sequence[str]):
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--override-tol expects NAME=VALUE, got {item!r}")
        out[key.strip()] = float(val)
    return out


def cmd_validate(args) -> int:
    from .validate import CHECKS, run_suite

    cfg = build_config(args).validate()
    names = args.only.split(",") if args.only else None
    overrides = _parse_overrides(args.override_tol)
    bad = [n for n in list(overrides) + (names or []) if n not in CHECKS]
    if bad:
        raise ConfigError(f"unknown check(s) {bad}; known: {', '.join(CHECKS)}")
    report = run_suite(names, overrides, cfg, echo=print)
    for d in report.dropped_terms:
        print(f"dropped divergent tail: S0={d['s0']:g} n={d['n']} k2n={d['k2']:.6g}")
    text = json.dumps(report.to_dict(), indent=2, default=float)
    if args.json:
        Path(args.json).write_text(text + "\n", encoding="utf-8")
    failed = [c.name for c in report.checks if not c.passed]
    print("validation " + ("passed" if not failed else "FAILED: " + ", ".join(failed)))
    return EXIT_OK if not failed else EXIT_FAIL


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stepwell", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="bound-state wavenumbers of the well")
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("price", help="price one or more spots")
    _add_common(p)
    p.add_argument("--mc", action="store_true", help="add Monte Carlo columns")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("sweep", help="price curves for a figure preset or custom grid")
    _add_common(p)
    p.add_argument("--out", default=None, help="output directory (or .csv path for custom)")
    p.add_argument("--svg", action="store_true")
    p.add_argument("--mc", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the acceptance suite")
    _add_common(p)
    p.add_argument("--only", help="comma-separated check names")
    p.add_argument("--override-tol", action="append", metavar="NAME=VALUE")
    p.add_argument("--json", help="write the JSON report here")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "sweep":
        args.out_given = args.out is not None
        args.out = args.out or "."
    try:
        return args.func(args)
    except UnsupportedConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, StepwellError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
