"""Batch command-line front door.

Model files are JSON documents::

    {
      "model": {
        "b": {"const": 0.1},
        "sigma": {"knots": [0.0, 1.0, 2.0], "values": [0.2, 0.22, 0.2]},
        "theta": {"const": 0.02},
        "r0": 0.03,
        "horizon": 2.0
      }
    }

Curves are either ``{"const": x}`` or ``{"knots": [...], "values": [...]}``
(piecewise cubic through the knots). stdout is machine-parseable; stderr
carries diagnostics. Exit codes: 0 ok, 2 usage or domain error, 3 numerical
warning, 4 numerical failure.

``XCIR_THREADS`` caps the worker threads used for independent sub-tasks.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .charfn import RateLaw
from .errors import XcirError
from .montecarlo import SimConfig, mc_option_price
from .optionpricer import OptionSpec, price_call_fourier, price_call_laplace
from .termstructure import ExtendedCirParams, validate_assumption1
from .validation import run_suite
from . import bondpricing

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_WARNING = 3
EXIT_FAILURE = 4


def worker_count() -> int:
    raw = os.environ.get("XCIR_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return max(1, n) if n > 0 else min(4, os.cpu_count() or 1)


def _load_model(path: str) -> ExtendedCirParams:
    params = ExtendedCirParams.load(path)
    report = validate_assumption1(params, 1024)
    if report.violations:
        worst = ", ".join(f"t={t:.4g}: {msg}" for t, msg in report.violations[:3])
        raise ValueError(f"model curves violate positivity ({worst})")
    return params


def cmd_price_bond(args) -> int:
    params = _load_model(args.model)
    if args.maturity > params.horizon:
        raise ValueError("maturity beyond horizon")
    sol = bondpricing.solve_riccati(params, args.maturity, n_steps=args.steps)
    print(f"P(0,T)\t{float(sol.price(0.0, params.r0)):.10g}")
    print(f"C(0,T)\t{float(sol.c(0.0)):.10g}")
    print(f"A(0,T)\t{float(sol.a(0.0)):.10g}")
    return EXIT_OK


def cmd_price_option(args) -> int:
    params = _load_model(args.model)
    if not 0.0 < args.expiry < args.maturity:
        raise ValueError("need 0 < expiry < maturity")
    if args.maturity > params.horizon:
        raise ValueError("maturity beyond horizon")
    spec = OptionSpec(expiry=args.expiry, bond_maturity=args.maturity, strike=args.strike)
    cfg = SimConfig(n_paths=args.paths, dt=args.dt, seed=args.seed)

    rows: list[tuple[str, float, float | None]] = []
    if args.method in ("laplace", "all"):
        rows.append(("laplace", price_call_laplace(params, spec), None))
    if args.method in ("fourier", "all"):
        rows.append(("fourier", price_call_fourier(params, spec), None))
    if args.method in ("mc", "all"):
        price, se = mc_option_price(params, spec, cfg)
        rows.append(("mc", price, se))

    print("method\tprice\tse")
    for name, price, se in rows:
        se_text = f"{se:.6g}" if se is not None else ""
        print(f"{name}\t{price:.10g}\t{se_text}")
    if args.method == "all":
        prices = [price for _, price, _ in rows]
        spread = max(prices) - min(prices)
        print(f"max_discrepancy\t{spread:.10g}\t")
    return EXIT_OK


def _parse_grid(text: str, law: RateLaw) -> np.ndarray:
    if text == "auto":
        mean, std = law.mean(), float(np.sqrt(law.variance()))
        return np.linspace(0.0, mean + 8.0 * std, 201)
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("grid must be 'lo:hi:n' or 'auto'")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 2 or hi <= lo:
        raise ValueError("grid must satisfy lo < hi and n >= 2")
    return np.linspace(lo, hi, n)


def cmd_density(args) -> int:
    params = _load_model(args.model)
    if not 0.0 < args.time <= params.horizon:
        raise ValueError("time outside (0, horizon]")
    law = RateLaw(params, args.time)
    grid = _parse_grid(args.grid, law)
    result = law.density(grid, n_quad=args.quad)

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["x", "density"])
        for xv, fv in zip(result.x, result.density):
            writer.writerow([f"{xv:.10g}", f"{fv:.10g}"])
    finally:
        if args.out:
            out.close()
    print(f"mass={result.mass:.8f} omega_max={result.omega_max:.6g}", file=sys.stderr)
    if not result.ok:
        flags = []
        if result.omega_capped:
            flags.append(f"transform not decayed at cap (|CF|={result.cf_tail:.2e})")
        if result.negative_overshoot:
            flags.append("negative density overshoot beyond -1e-6")
        print("warning: " + "; ".join(flags), file=sys.stderr)
        return EXIT_WARNING
    return EXIT_OK


def cmd_validate(args) -> int:
    params = _load_model(args.model)
    kwargs = {}
    if args.suite in ("mc-cf", "mc-bond", "mc-option", "stochvol"):
        kwargs.update(n_paths=args.paths, seed=args.seed)
    elif args.suite == "constructive":
        kwargs.update(n_samples=args.paths, seed=args.seed)
    results = run_suite(args.suite, params, **kwargs)
    for check in results:
        print(check.line())
    return EXIT_OK if all(c.passed for c in results) else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xcir",
        description="Time-varying square-root short-rate model: pricing and validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bond = sub.add_parser("price-bond", help="zero-coupon bond price P(0,T)")
    p_bond.add_argument("model")
    p_bond.add_argument("maturity", type=float)
    p_bond.add_argument("--steps", type=int, default=0, help="Riccati grid steps (0 = auto)")
    p_bond.set_defaults(fn=cmd_price_bond)

    p_opt = sub.add_parser("price-option", help="European call on a zero-coupon bond")
    p_opt.add_argument("model")
    p_opt.add_argument("expiry", type=float)
    p_opt.add_argument("maturity", type=float)
    p_opt.add_argument("strike", type=float)
    p_opt.add_argument("--method", choices=["laplace", "fourier", "mc", "all"], default="laplace")
    p_opt.add_argument("--paths", type=int, default=100_000)
    p_opt.add_argument("--seed", type=int, default=0)
    p_opt.add_argument("--dt", type=float, default=1e-3)
    p_opt.set_defaults(fn=cmd_price_option)

    p_den = sub.add_parser("density", help="density of r(t) by transform inversion (CSV)")
    p_den.add_argument("model")
    p_den.add_argument("time", type=float)
    p_den.add_argument("--grid", default="auto", help="'lo:hi:n' or 'auto'")
    p_den.add_argument("--quad", type=int, default=10_000)
    p_den.add_argument("--out", default=None)
    p_den.set_defaults(fn=cmd_density)

    p_val = sub.add_parser("validate", help="run a named validation suite")
    p_val.add_argument("model")
    p_val.add_argument(
        "suite",
        choices=[
            "reduction", "ibp", "fokker-planck", "mc-cf",
            "mc-bond", "mc-option", "constructive", "stochvol",
        ],
    )
    p_val.add_argument("--paths", type=int, default=50_000)
    p_val.add_argument("--seed", type=int, default=0)
    p_val.set_defaults(fn=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except XcirError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
