"""Command-line interface with reproducible file-based outputs.

Subcommands: roots, curves, toy, profile, kernel, simulate, table.  Numeric
output is fixed at six significant digits so identical invocations produce
byte-identical files.  Exit codes: 0 success, 1 domain error, 2 accuracy
error, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, chareq, kernels, pdesim, speedcurves, toyfront
from .chareq import ModelParams
from .errors import AccuracyError, DomainError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 3, not argparse's default 2
        raise UsageError(message)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if np.isinf(x):
            return "inf"
        return f"{x:.6g}"
    return str(x)


def _print_kv(pairs) -> None:
    for key, val in pairs:
        print(f"{key}={_fmt(val)}")


class _Manifest:
    """Collects outputs of one command and lands manifest.json at the end."""

    def __init__(self, command: str, params: dict, out_dir: str):
        self.command = command
        self.params = {k: v for k, v in params.items() if not callable(v)}
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []
        self.t0 = time.monotonic()

    def write_text(self, name: str, text: str) -> None:
        (self.dir / name).write_text(text)
        self.outputs.append(name)

    def finalize(self) -> None:
        doc = {
            "command": self.command,
            "parameters": self.params,
            "version": __version__,
            "outputs": self.outputs,
            "duration_seconds": round(time.monotonic() - self.t0, 3),
        }
        (self.dir / "manifest.json").write_text(json.dumps(doc, indent=2) + "\n")


def _cmd_roots(args) -> int:
    params = ModelParams.toy(args.k)
    r0 = chareq.roots_at_zero(args.c, args.h, params)
    rk = chareq.roots_at_kappa(args.c, args.h, params)
    _print_kv(
        [
            ("lambda1", r0.lambda1 if r0.exists else None),
            ("lambda2", r0.lambda2 if r0.exists else None),
            ("lambda_exists", r0.exists),
            ("mu1", rk.mu1),
            ("mu2", rk.mu2),
            ("mu3", rk.mu3),
            ("in_region_Dkappa", rk.in_region_Dkappa),
        ]
    )
    return 0


def _cmd_curves(args) -> int:
    params = ModelParams.toy(args.k)
    n = int(round((args.h_max - args.h_min) / args.h_step))
    grid = [args.h_min + i * args.h_step for i in range(n + 1)]
    man = _Manifest("curves", vars(args), args.out)
    samples = speedcurves.sample_curves(grid, params, jobs=args.jobs)
    man.write_text("curves.csv", speedcurves.curves_csv(samples))
    man.finalize()
    return 0


def _cmd_toy(args) -> int:
    pairs = []
    c_sharp, _ = chareq.double_root_speed(args.h, args.k)
    c_star, regime = toyfront.minimal_speed(args.h, args.k)
    pairs += [("h", args.h), ("c_sharp", c_sharp), ("c_star", c_star), ("regime", regime)]
    if regime == "pushed":
        tq = toyfront.ToyQuantities.at(c_star, args.h, args.k)
        pairs += [("ratio_T", tq.ratio_T), ("target", tq.target)]
    if args.transitions:
        pairs.append(("h_pushed_to_pulled", toyfront.pushed_to_pulled_delay(args.k)))
        pairs.append(("h_oscillation", toyfront.oscillation_threshold(args.k)))
    if args.limits:
        lq = toyfront.limit_quantities(args.k)
        pairs += [
            ("w_plus", lq.w_plus),
            ("rho", lq.rho),
            ("lambda_inf", lq.lambda_inf),
            ("mu_inf", lq.mu_inf),
            ("T1_inf", lq.T1_inf),
            ("w_minus", lq.w_minus),
            ("rho_hat", lq.rho_hat),
            ("lambda_hat_inf", lq.lambda_hat_inf),
            ("mu_hat_inf", lq.mu_hat_inf),
            ("T2_inf", lq.T2_inf),
        ]
    _print_kv(pairs)
    return 0


def _cmd_profile(args) -> int:
    c = args.c
    if c is None:
        c, _ = toyfront.minimal_speed(args.h, args.k)
    prof = toyfront.build_profile(c, args.h, args.k, t_max=args.t_max,
                                  grid_step=args.grid_step)
    man = _Manifest("profile", vars(args), args.out)
    ch = prof.c * prof.h
    lines = ["t,phi,dphi"]
    tail_t = np.arange(-ch - 10.0, 0.0, prof.grid_step)
    for tv in tail_t:
        lines.append(f"{_fmt(float(tv))},{_fmt(float(prof.tail(tv)))},"
                     f"{_fmt(float(prof.tail_deriv(tv)))}")
    for tv, ph, dp in zip(prof.t, prof.phi, prof.dphi):
        lines.append(f"{_fmt(float(tv))},{_fmt(float(ph))},{_fmt(float(dp))}")
    man.write_text("profile.csv", "\n".join(lines) + "\n")
    header = {
        "c": prof.c,
        "h": prof.h,
        "k": prof.k,
        "p": prof.p,
        "lambda1": prof.lambda1,
        "lambda2": prof.lambda2,
        "classification": prof.classification,
        "residual_max": prof.residual_max,
    }
    man.write_text("profile.json", json.dumps(header, indent=2) + "\n")
    man.finalize()
    return 0


def _cmd_kernel(args) -> int:
    params = ModelParams.toy(args.k)
    man = _Manifest("kernel", vars(args), args.out)
    psi = kernels.psi_kernel(args.c, args.h, params, t_max=args.t_max,
                             step=args.step)
    nker = kernels.N_kernel(args.c, args.h, params, t_max=args.t_max,
                            step=args.step)
    theta_vals = kernels.theta_kernel(nker.t, psi.mu2)
    for name, grid_t, grid_v in (
        ("psi.csv", psi.t, psi.values),
        ("theta.csv", nker.t, theta_vals),
        ("n.csv", nker.t, nker.values),
    ):
        rows = "\n".join(f"{_fmt(float(a))},{_fmt(float(b))}"
                         for a, b in zip(grid_t, grid_v))
        man.write_text(name, "t,value\n" + rows + "\n")
    man.finalize()
    return 0


def _cmd_simulate(args) -> int:
    snaps = tuple(float(s) for s in args.snapshots.split(",")) if args.snapshots else ()
    cfg = pdesim.SimConfig(
        h=args.h, k=args.k, t_end=args.t_end, x_min=args.x_min, x_max=args.x_max,
        dx=args.dx, dt=args.dt, snapshot_times=snaps,
    )
    res = pdesim.run(cfg)
    man = _Manifest("simulate", vars(args), args.out)
    rows = "\n".join(f"{_fmt(float(t))},{_fmt(float(x))}" for t, x in res.level_trajectory)
    man.write_text("trajectory.csv", "t,x_level\n" + rows + "\n")
    x = cfg.x_min + cfg.dx * np.arange(cfg.n_points)
    for t_snap, u in res.snapshots:
        rows = "\n".join(f"{_fmt(float(a))},{_fmt(float(b))}" for a, b in zip(x, u))
        man.write_text(f"snapshot_t{_fmt(float(t_snap))}.csv", "x,u\n" + rows + "\n")
    man.write_text(
        "result.json",
        json.dumps(
            {
                "c_ns": res.c_ns,
                "fit_window": list(res.fit_window),
                "fit_residual": res.fit_residual,
                "u_min": res.u_min,
                "u_max": res.u_max,
            },
            indent=2,
        )
        + "\n",
    )
    man.finalize()
    return 0


def _table_row(h: float, k: float, t_end: float) -> tuple:
    c_sharp, _ = chareq.double_root_speed(h, k)
    c_star, _ = toyfront.minimal_speed(h, k)
    cfg = pdesim.SimConfig(h=h, k=k, t_end=t_end)
    c_ns = pdesim.run(cfg).c_ns
    return h, c_sharp, c_star, c_ns


def _cmd_table(args) -> int:
    rows = [float(s) for s in args.rows.split(",")]
    man = _Manifest("table", vars(args), args.out)
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futs = [pool.submit(_table_row, h, args.k, args.t_end) for h in rows]
            results = [f.result() for f in futs]
    else:
        results = [_table_row(h, args.k, args.t_end) for h in rows]
    lines = ["h,c_sharp,c_star,c_ns"]
    for h, cs, cst, cns in results:
        lines.append(f"{_fmt(h)},{_fmt(cs)},{_fmt(cst)},{_fmt(cns)}")
    man.write_text("table.csv", "\n".join(lines) + "\n")
    man.finalize()
    return 0


def _build_parser() -> tuple[_Parser, dict]:
    parser = _Parser(prog="delayfronts",
                     description="Traveling-front laboratory for the delayed "
                                 "monostable reaction-diffusion equation")
    parser.add_argument("--seed", help=argparse.SUPPRESS)
    parser.add_argument("--config", help="key=value file supplying defaults "
                                         "(explicit flags win)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roots", help="characteristic roots at one (c, h)")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.set_defaults(fn=_cmd_roots)

    p = sub.add_parser("curves", help="speed-curve sweep over a delay grid")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--h-min", type=float, default=0.0)
    p.add_argument("--h-max", type=float, default=6.0)
    p.add_argument("--h-step", type=float, default=0.05)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=".")
    p.set_defaults(fn=_cmd_curves)

    p = sub.add_parser("toy", help="minimal speed, transitions and limits")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--h", type=float, default=0.0)
    p.add_argument("--limits", action="store_true")
    p.add_argument("--transitions", action="store_true")
    p.set_defaults(fn=_cmd_toy)

    p = sub.add_parser("profile", help="build and export a front profile")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--c", type=float, default=None,
                   help="wave speed (default: the minimal speed)")
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--grid-step", type=float, default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(fn=_cmd_profile)

    p = sub.add_parser("kernel", help="fundamental-solution grids psi, theta, N")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(fn=_cmd_kernel)

    p = sub.add_parser("simulate", help="one Cauchy-problem run")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--t-end", type=float, default=400.0)
    p.add_argument("--x-min", type=float, default=-25.0)
    p.add_argument("--x-max", type=float, default=25.0)
    p.add_argument("--dx", type=float, default=0.05)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--snapshots", default="",
                   help="comma-separated times at which to store the field")
    p.add_argument("--out", default=".")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("table", help="speed comparison table (runs simulations)")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--rows", default="0.5,1,1.5,2,2.5,3,3.5,4,4.5,5,5.5,6",
                   help="comma-separated delays")
    p.add_argument("--t-end", type=float, default=400.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=".")
    p.set_defaults(fn=_cmd_table)
    option_table = {
        name: set(sp._option_string_actions) for name, sp in sub.choices.items()
    }
    return parser, option_table


def _apply_config(argv: list[str], option_table: dict) -> list[str]:
    """Turn config-file entries into trailing flags the user did not give.

    Precedence is flags > file > parser defaults, so entries already present
    on the command line are skipped; boolean entries append the bare flag
    when true.
    """
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file path")
    path = Path(argv[i + 1])
    argv = argv[:i] + argv[i + 2 :]
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    command = next((a for a in argv if not a.startswith("-")), None)
    known = option_table.get(command, set())
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"config line is not key=value: {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if flag not in known or flag in argv:
            continue
        if val.lower() in ("true", "false"):
            if val.lower() == "true":
                argv.append(flag)
        else:
            argv.extend([flag, val])
    return argv


def main(argv=None) -> int:
    parser, option_table = _build_parser()
    try:
        argv = list(sys.argv[1:] if argv is None else argv)
        argv = _apply_config(argv, option_table)
        args = parser.parse_args(argv)
        if args.seed is not None:
            raise UsageError("--seed is not accepted: every command is deterministic")
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 1
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
