"""Command-line interface.

Subcommands
-----------
price        series price of one claim plus its hedge ratios (JSON)
curve        strike x tenor sweep of call/put/binary/bond/forward (CSV)
eigen        eigen-system report (CSV)
density      Robin transition kernel on an x' grid (CSV)
mc-validate  Monte Carlo estimate against the series price (JSON)
replicate    discrete-hedge RMS replication error (JSON)

Spots and strikes are quoted in FX units and converted to the state
coordinate internally.  Numbers print with 17 significant digits and output
is byte-stable for a fixed seed regardless of TZO_THREADS.  Exit codes:
0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import mc, pricing, robin
from .errors import NumericalError, ValidationError
from .hedging import delta as hedge_delta
from .models import model_from_dict

_CONFIG_KEYS = {"model", "mc", "output", "domestic_discount"}
_MC_KEYS = {"paths", "dt", "seed"}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    raise TypeError(f"unsupported value {value!r}")


def _dump_json(obj: dict) -> str:
    parts = []
    for key, value in obj.items():
        parts.append(f'"{key}": {_fmt(value)}')
    return "{" + ", ".join(parts) + "}\n"


def _csv_row(fields) -> str:
    cells = []
    for v in fields:
        if v is None:
            cells.append("")
        elif isinstance(v, str):
            cells.append(v)
        else:
            cells.append(_fmt(v))
    return ",".join(cells) + "\n"


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config: file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config: invalid JSON ({exc})")
    if not isinstance(data, dict):
        raise ValidationError("config: expected a JSON object")
    if "kind" in data:
        return {"model": data}
    for key in data:
        if key not in _CONFIG_KEYS:
            raise ValidationError(f"config.{key}: unknown key")
    if "model" not in data:
        raise ValidationError("config.model: missing")
    if "mc" in data:
        for key in data["mc"]:
            if key not in _MC_KEYS:
                raise ValidationError(f"config.mc.{key}: unknown key")
    if "output" in data and data["output"] not in ("json", "csv"):
        raise ValidationError("config.output: expected 'json' or 'csv'")
    return data


def _mc_config(args, config: dict) -> mc.McConfig:
    block = config.get("mc", {})
    paths = args.paths if args.paths is not None else block.get("paths", 200_000)
    dt = args.dt if args.dt is not None else block.get("dt")
    seed = args.seed if args.seed is not None else block.get("seed", 0)
    return mc.McConfig(paths=int(paths), dt=dt, seed=int(seed))


def _grid_spec(text: str) -> list[float]:
    """Parse 'a:b:n' as n equally spaced values, or a comma list."""
    if ":" in text:
        lo, hi, count = text.split(":")
        n = int(count)
        if n < 1:
            raise ValidationError(f"grid count must be >= 1: {text!r}")
        return list(np.linspace(float(lo), float(hi), n))
    return [float(tok) for tok in text.split(",") if tok]


def _claim(args) -> pricing.Claim:
    kind = args.claim
    if kind == "bond":
        return pricing.Claim.bond()
    if args.strike is None:
        raise ValidationError(f"--strike is required for claim {kind!r}")
    return pricing.Claim(kind, strike=args.strike)


def _cmd_price(args) -> str:
    config = _load_config(args.config)
    model = model_from_dict(config["model"])
    claim = _claim(args)
    factor = (args.domestic_discount
              if args.domestic_discount is not None
              else config.get("domestic_discount", 1.0))
    eig = model.eigensystem(args.n_terms)
    coeffs = pricing.claim_coefficients(claim, eig, model)
    res = pricing.price_series(args.spot, args.tenor, coeffs, eig, model)
    if coeffs.hedgeable:
        phi = hedge_delta(res.x_hat, args.tenor, coeffs, eig, model)
        units = res.value - phi * args.spot
        phi *= factor
        units *= factor
    else:
        phi = None
        units = None
    return _dump_json({
        "value": res.value * factor,
        "delta": phi,
        "bond_holding": units,
        "n_used": res.n_used,
        "tail_bound": res.tail_bound,
    })


def _cmd_curve(args) -> str:
    config = _load_config(args.config)
    model = model_from_dict(config["model"])
    eig = model.eigensystem(args.n_terms)
    strikes = _grid_spec(args.strikes)
    tenors = _grid_spec(args.tenors)
    out = ["strike,tenor,call,put,binary,bond,forward\n"]
    for k in strikes:
        call_c = pricing.claim_coefficients(pricing.Claim.call(k), eig, model)
        put_c = pricing.claim_coefficients(pricing.Claim.put(k), eig, model)
        bin_c = pricing.claim_coefficients(pricing.Claim.binary(k), eig, model)
        bond_c = pricing.coeffs_bond(eig, model)
        fwd_c = pricing.coeffs_forward(k, eig, model)
        for t in tenors:
            row = [k, t]
            for cset in (call_c, put_c, bin_c, bond_c, fwd_c):
                row.append(pricing.price_series(args.spot, t, cset, eig,
                                                model).value)
            out.append(_csv_row(row))
    return "".join(out)


def _cmd_eigen(args) -> str:
    config = _load_config(args.config)
    model = model_from_dict(config["model"])
    eig = model.eigensystem(args.n_terms, grid_points=args.grid_points)
    out = ["n,energy,lambda,norm\n"]
    for n, energy, lam, norm in eig.mode_records():
        out.append(_csv_row([n, energy, lam, norm]))
    return "".join(out)


def _cmd_density(args) -> str:
    params = robin.RobinDensityParams(args.mu, args.sigma, args.rho,
                                      args.length)
    xs = np.linspace(0.0, args.length, args.points)
    vals = robin.density(args.x, xs, args.tau, params)
    out = ["x_prime,density\n"]
    for xp, p in zip(xs, vals):
        out.append(_csv_row([xp, p]))
    return "".join(out)


def _cmd_mc_validate(args) -> str:
    config = _load_config(args.config)
    model = model_from_dict(config["model"])
    claim = _claim(args)
    cfg = _mc_config(args, config)
    eig = model.eigensystem(args.n_terms)
    series = pricing.price(claim, args.spot, args.tenor, eig, model).value
    est = mc.mc_price(claim, model, args.spot, args.tenor, cfg)
    z = (est.mean - series) / est.std_error if est.std_error > 0 else 0.0
    return _dump_json({
        "series_price": series,
        "mc_mean": est.mean,
        "mc_se": est.std_error,
        "z_score": z,
    })


def _cmd_replicate(args) -> str:
    config = _load_config(args.config)
    model = model_from_dict(config["model"])
    claim = _claim(args)
    cfg = _mc_config(args, config)
    est = mc.replicate(claim, model, args.spot, args.tenor, args.steps, cfg,
                       n_modes=args.n_terms)
    return _dump_json({
        "rms_error": est.mean,
        "se": est.std_error,
        "paths": est.paths,
        "steps": args.steps,
    })


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tzo",
        description="Target-zone FX option pricer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spot=True, tenor=True):
        p.add_argument("--config", required=True,
                       help="JSON model (or full run) configuration")
        p.add_argument("--n-terms", type=int, default=64)
        if spot:
            p.add_argument("--spot", type=float, required=True)
        if tenor:
            p.add_argument("--tenor", type=float, required=True)

    p = sub.add_parser("price", help="series price of one claim")
    common(p)
    p.add_argument("--claim", required=True,
                   choices=["call", "put", "binary", "bond", "forward"])
    p.add_argument("--strike", type=float)
    p.add_argument("--domestic-discount", type=float, default=None,
                   help="deterministic domestic bond factor applied to the "
                        "foreign-numeraire price")

    p = sub.add_parser("curve", help="strike x tenor sweep (CSV)")
    common(p, tenor=False)
    p.add_argument("--strikes", required=True,
                   help="comma list or lo:hi:count")
    p.add_argument("--tenors", required=True, help="comma list or lo:hi:count")

    p = sub.add_parser("eigen", help="eigen-system report (CSV)")
    p.add_argument("--config", required=True)
    p.add_argument("--n-terms", type=int, default=16)
    p.add_argument("--grid-points", type=int, default=2001)

    p = sub.add_parser("density", help="Robin transition kernel (CSV)")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--points", type=int, default=201)

    p = sub.add_parser("mc-validate", help="Monte Carlo vs series price")
    common(p)
    p.add_argument("--claim", required=True,
                   choices=["call", "put", "binary", "bond", "forward"])
    p.add_argument("--strike", type=float)
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("replicate", help="discrete-hedge replication error")
    common(p)
    p.add_argument("--claim", required=True,
                   choices=["call", "put", "bond", "forward"])
    p.add_argument("--strike", type=float)
    p.add_argument("--steps", type=int, default=64)
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)

    return parser


_DISPATCH = {
    "price": _cmd_price,
    "curve": _cmd_curve,
    "eigen": _cmd_eigen,
    "density": _cmd_density,
    "mc-validate": _cmd_mc_validate,
    "replicate": _cmd_replicate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = _DISPATCH[args.command](args)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except NumericalError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return 3
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
