"""Command-line entry point.

Subcommands: ml-eval, solve-linear, solve-system, blowup, verify.
Exit codes: 0 success, 1 check failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, parse_config
from .mittag_leffler import MlParams, ml
from .verify_suite import format_report, run_verification_suite


def _load_config(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc}"]) from exc
    return parse_config(text)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def cmd_ml_eval(args) -> int:
    params = MlParams(args.alpha, args.beta)
    print("z,value")
    if args.table:
        try:
            lo, hi, step = (float(v) for v in args.table.split(":"))
        except ValueError:
            print("--table expects from:to:step", file=sys.stderr)
            return 2
        z = lo
        while z <= hi + 1e-15:
            print(f"{_fmt(z)},{_fmt(ml(params, z))}")
            z += step
    else:
        print(f"{_fmt(args.z)},{_fmt(ml(params, args.z))}")
    return 0


def cmd_solve_linear(args) -> int:
    from .runner import run_linear

    cfg = _load_config(args.config)
    history, probe = run_linear(cfg, out_dir=args.out_dir)
    if probe:
        print(f"probes written to {probe}")
    print(f"solved {history.grid.n_steps} steps, {history.basis.n_modes} modes")
    return 0


def cmd_solve_system(args) -> int:
    from .runner import run_system

    cfg = _load_config(args.config)
    arts = run_system(cfg, out_dir=args.out_dir, snapshot_every=args.snapshot_every)
    sol = arts.solution
    if arts.probe_path:
        print(f"probes written to {arts.probe_path}")
    if sol.blown_up:
        print(f"blow-up suspected at step {sol.last_valid_step + 1} "
              f"(t = {_fmt((sol.last_valid_step + 1) * sol.grid.dt)})")
    else:
        print(f"completed {sol.grid.n_steps} steps ({sol.sweeps_total} Picard sweeps)")
    return 0


def cmd_blowup(args) -> int:
    from .runner import run_blowup

    cfg = _load_config(args.config)
    sweep = None
    if args.sweep:
        try:
            name, rng = args.sweep.split("=")
            lo, hi, step = (float(v) for v in rng.split(":"))
        except ValueError:
            print("--sweep expects alpha=from:to:step", file=sys.stderr)
            return 2
        if name.strip() != "alpha":
            print("only alpha sweeps are supported", file=sys.stderr)
            return 2
        sweep = []
        a = lo
        while a <= hi + 1e-12:
            sweep.append(round(a, 12))
            a += step
    rows, path = run_blowup(cfg, out_dir=args.out_dir, sweep_alphas=sweep)
    print(f"report written to {path}")
    return 0 if all(rep.passed for _, rep in rows) else 1


def cmd_verify(args) -> int:
    code, results = run_verification_suite(
        seed=args.seed, only=args.only, parallel=args.parallel
    )
    report = format_report(results)
    print(report)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "verify_report.txt"), "w") as fh:
            fh.write(report + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--out-dir", default=".", help="directory for CSV outputs")
    common.add_argument("--only", default=None, help="run only matching verify checks")
    common.add_argument("--parallel", action="store_true",
                        help="run verify checks concurrently")
    parser = argparse.ArgumentParser(
        prog="fracrd",
        description="Time-fractional reaction-diffusion solver and verification lab",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ml-eval", help="evaluate the Mittag-Leffler function", parents=[common])
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--z", type=float, default=0.0)
    p.add_argument("--table", default=None, help="from:to:step sweep over z")
    p.set_defaults(fn=cmd_ml_eval)

    p = sub.add_parser("solve-linear", help="solve the scalar linear problem", parents=[common])
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_solve_linear)

    p = sub.add_parser("solve-system", help="solve the coupled nonlinear system", parents=[common])
    p.add_argument("--config", required=True)
    p.add_argument("--snapshot-every", type=int, default=None)
    p.set_defaults(fn=cmd_solve_system)

    p = sub.add_parser("blowup", help="run and certify a blow-up configuration", parents=[common])
    p.add_argument("--config", required=True)
    p.add_argument("--sweep", default=None, help="alpha=from:to:step")
    p.set_defaults(fn=cmd_blowup)

    p = sub.add_parser("verify", help="run the verification suite", parents=[common])
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        for msg in exc.messages:
            print(f"config error: {msg}", file=sys.stderr)
        return 2
    except (ValueError, OverflowError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
