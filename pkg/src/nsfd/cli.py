"""Command-line entry point: ``nsfd {simulate,thresholds,errors,conservation,equilibria}``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import bench
from .exceptions import NSFDError, UsageError

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _param(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    return key.strip(), value.strip()


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=bench.MODEL_NAMES, default="single-species")
    p.add_argument("--param", type=_param, action="append", default=[], metavar="NAME=VALUE",
                   help="model parameter override, repeatable (single-species also takes birth=B1|B2|B3)")
    p.add_argument("--out", default=None, help="output CSV path (default: standard output)")


def _run_args(p: argparse.ArgumentParser, scheme_default: str | None = "nsfd") -> None:
    p.add_argument("--scheme", choices=("nsfd", "nonstd-euler", "euler", "rk2", "rk4"), default=scheme_default)
    p.add_argument("--m", type=float, default=None, help="NSFD parameter m (default: required threshold)")
    p.add_argument("--phi", choices=("identity", "exp", "exact-gcl", "exact-linear"), default="identity")
    p.add_argument("--tau", type=float, default=None, help="rate of the exponential denominator")
    p.add_argument("--b1", type=float, default=None, help="decay rate for exact denominators (default: model GCL)")
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--y0", type=_floats, default=None, metavar="v1,v2,...")
    p.add_argument("--ref-dt", type=float, default=1e-5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsfd", description="Structure-preserving NSFD integration benchmarks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a model and write the trajectory as CSV")
    _model_args(p)
    _run_args(p)

    p = sub.add_parser("thresholds", help="print m_P, m_S, m_GCL and phi_P, phi_S, phi_GCL")
    _model_args(p)

    p = sub.add_parser("errors", help="error table against an RK4 reference")
    _model_args(p)
    _run_args(p, scheme_default=None)
    p.add_argument("--dts", type=_floats, default=None, metavar="dt1,dt2,...",
                   help="step sizes (default 1,1e-1,...,1e-5)")
    p.set_defaults(horizon=None)

    p = sub.add_parser("conservation", help="check the model's conservation law along a run")
    _model_args(p)
    _run_args(p)

    p = sub.add_parser("equilibria", help="find and classify equilibria")
    _model_args(p)
    p.add_argument("--seed", type=_floats, action="append", default=None, metavar="v1,v2,...",
                   help="Newton seed, repeatable (default: 3-per-axis grid over [0,10]^n)")
    return parser


def _config(args) -> bench.RunConfig:
    return bench.RunConfig(
        model=args.model, params=dict(args.param), scheme=args.scheme or "nsfd", m=args.m, phi=args.phi,
        tau=args.tau, b1=args.b1, dt=args.dt, steps=args.steps, horizon=args.horizon, y0=args.y0,
        out=args.out, ref_dt=args.ref_dt,
    )


def _run(args) -> int:
    out = args.out if args.out is not None else "-"
    if args.command == "simulate":
        traj = bench.run_simulation(_config(args))
        if traj.diverged:
            print(f"warning: run diverged ({traj.message})", file=sys.stderr)
        return 0
    model = bench.build_model(args.model, dict(args.param))
    if args.command == "thresholds":
        bench.run_thresholds(model, out=out)
    elif args.command == "equilibria":
        bench.run_equilibria(model, seeds=args.seed, out=out)
    elif args.command == "conservation":
        bench.run_conservation(_config(args), model=model)
    elif args.command == "errors":
        cfg = _config(args)
        horizon = 10.0 if args.horizon is None else args.horizon
        schemes = None if args.scheme is None else [bench.build_scheme(cfg, model)]
        bench.run_table(model, y0=cfg.initial_state(model), horizon=horizon,
                        dts=args.dts or bench.TABLE_DTS, ref_dt=args.ref_dt, schemes=schemes, out=out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except UsageError as exc:
        print(f"nsfd {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NSFDError as exc:
        print(f"nsfd {args.command}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
