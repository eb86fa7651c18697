"""Command-line interface.

Subcommands:
  gen         synthesize an instance file
  solve       run the constrained solver on an instance file
  width / local-width / cone-width / rsv-check    geometry estimates (CSV rows)
  sweep / phase / tsweep    experiment harness driven by key=value configs

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time

import numpy as np

from .errors import (InvalidLinkError, InvalidSpecError, NotSubGaussianError,
                     NumericalFailureError, UnboundedSetError)
from .experiments import (PHASE_COLUMNS, TSWEEP_COLUMNS, parse_config_file, phase_diagram,
                          run_sweep, scaling_fit, t_sweep, write_dict_csv, write_manifest,
                          write_rows_csv, FitUndefinedError)
from .geometry import (descent_cone_width_mc, gaussian_complexity_mc, gaussian_width_mc,
                       local_gaussian_width_mc, rsv_check, sample_cone_directions)
from .links import link_params, parse_link
from .model import InstanceSpec, generate_instance, load_instance, save_instance
from .sets import parse_set
from .solver import SolveOptions, error_split, solve_tlasso

WIDTH_COLUMNS = ["quantity", "set_spec", "t", "mean", "std_error", "trials", "seed"]


def _width_row(writer, est, set_spec, seed):
    writer.writerow([est.quantity, set_spec, "" if est.t is None else f"{est.t:.17g}",
                     f"{est.mean:.17g}", f"{est.std_error:.17g}", est.trials, seed])


def _cmd_gen(args):
    spec = InstanceSpec(n=args.n, m=args.m, s=args.s, k=args.k,
                        corruption_amplitude=args.amplitude,
                        link=parse_link(args.link), seed=args.seed)
    save_instance(generate_instance(spec), args.out)
    print(f"wrote instance ({args.m}x{args.n}, seed {args.seed}) to {args.out}")


def _cmd_solve(args):
    inst = load_instance(args.instance)
    set_x = parse_set(args.set_x, dim=inst.n)
    set_v = parse_set(args.set_v, dim=inst.m)
    opts = SolveOptions(max_iters=args.max_iters, grad_map_tol=args.tol,
                        trace_objective=args.trace is not None)
    result = solve_tlasso(inst, set_x, set_v, opts)
    params = link_params(inst.link)
    sig, cor = error_split(result, inst, params)
    joint = float(np.hypot(sig, cor))
    print(f"seed={inst.seed} iterations={result.iterations} converged={result.converged} "
          f"residual={result.final_residual_norm:.6e} joint_error={joint:.6e}")
    if args.trace:
        with open(args.trace, "w") as fh:
            for i, obj in enumerate(result.objective_trace):
                fh.write(f"{i} {obj:.17g}\n")


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def _cmd_width(args, local=False, complexity=False):
    cset = parse_set(args.set, dim=args.dim)
    if local:
        est = local_gaussian_width_mc(cset, args.t, args.trials, args.seed)
    elif complexity:
        est = gaussian_complexity_mc(cset, args.trials, args.seed)
    else:
        est = gaussian_width_mc(cset, args.trials, args.seed)
    out = _open_out(args.out)
    writer = csv.writer(out)
    writer.writerow(WIDTH_COLUMNS)
    _width_row(writer, est, args.set, args.seed)
    if out is not sys.stdout:
        out.close()


def _cmd_cone_width(args):
    inst = load_instance(args.instance)
    params = link_params(inst.link)
    set_x = parse_set(args.set_x, dim=inst.n)
    set_v = parse_set(args.set_v, dim=inst.m)
    anchor = (params.mu * inst.x_star, inst.v_star)
    est = descent_cone_width_mc(set_x, set_v, anchor, args.trials, args.seed)
    out = _open_out(args.out)
    writer = csv.writer(out)
    writer.writerow(WIDTH_COLUMNS)
    _width_row(writer, est, f"cone({args.set_x},{args.set_v})", args.seed)
    if out is not sys.stdout:
        out.close()


def _cmd_rsv_check(args):
    inst = load_instance(args.instance)
    params = link_params(inst.link)
    set_x = parse_set(args.set_x, dim=inst.n)
    set_v = parse_set(args.set_v, dim=inst.m)
    anchor = (params.mu * inst.x_star, inst.v_star)
    cone = sample_cone_directions(set_x, set_v, anchor, args.directions, args.seed)
    emp_min, (sqm, gamma_hat) = rsv_check(inst, cone, args.trials)
    c_hat = (sqm - emp_min) / gamma_hat if gamma_hat > 0 else float("nan")
    print(f"empirical_min={emp_min:.6f} sqrt_m={sqm:.6f} gamma_hat={gamma_hat:.6f} "
          f"implied_C={c_hat:.4f}")


def _collect_overrides(args) -> dict:
    keys = ("kind", "m_grid", "n", "s", "k", "amplitude", "link", "set_x", "set_v",
            "radius_scale", "trials", "seed", "out", "t_grid", "axis", "axis_grid")
    return {k: v for k in keys if (v := getattr(args, f"opt_{k}", None)) is not None}


def _cmd_harness(args, kind: str):
    config = parse_config_file(args.config, _collect_overrides(args))
    if not config.out:
        raise InvalidSpecError("config needs an 'out' path")
    t0 = time.perf_counter()
    extra = {}
    if kind == "sweep":
        rows = run_sweep(config)
        write_rows_csv(rows, config.out)
        try:
            slope, intercept, r2 = scaling_fit(rows)
            extra["fit"] = {"exponent": slope, "intercept": intercept, "r2": r2}
        except (FitUndefinedError, InvalidSpecError):
            extra["fit"] = None
    elif kind == "phase":
        cells = phase_diagram(config)
        write_dict_csv(cells, PHASE_COLUMNS, config.out)
    else:
        rows, c_hat = t_sweep(config)
        write_dict_csv(rows, TSWEEP_COLUMNS, config.out)
        extra["C_hat"] = c_hat
    write_manifest(config.out + ".manifest.json", config, time.perf_counter() - t0, extra)
    print(f"wrote {config.out}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tlasso", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="synthesize an instance file")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--s", type=int, required=True)
    g.add_argument("--k", type=int, default=0)
    g.add_argument("--amplitude", type=float, default=1.0)
    g.add_argument("--link", default="identity")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--out", required=True)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--set-x", dest="set_x", required=True)
    s.add_argument("--set-v", dest="set_v", required=True)
    s.add_argument("--max-iters", type=int, default=100_000)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--trace", help="per-iteration objective trace file")

    for name in ("width", "complexity", "local-width"):
        w = sub.add_parser(name, help=f"Monte Carlo {name.replace('-', ' ')} estimate")
        w.add_argument("--set", required=True)
        w.add_argument("--dim", type=int, required=True)
        w.add_argument("--trials", type=int, default=2000)
        w.add_argument("--seed", type=int, default=0)
        w.add_argument("-o", "--out", default="")
        if name == "local-width":
            w.add_argument("--t", type=float, required=True)

    c = sub.add_parser("cone-width", help="descent-cone width at the instance anchor")
    c.add_argument("instance")
    c.add_argument("--set-x", dest="set_x", required=True)
    c.add_argument("--set-v", dest="set_v", required=True)
    c.add_argument("--trials", type=int, default=200)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("-o", "--out", default="")

    r = sub.add_parser("rsv-check", help="empirical restricted singular value")
    r.add_argument("instance")
    r.add_argument("--set-x", dest="set_x", required=True)
    r.add_argument("--set-v", dest="set_v", required=True)
    r.add_argument("--directions", type=int, default=500)
    r.add_argument("--trials", type=int, default=2000)
    r.add_argument("--seed", type=int, default=0)

    for name in ("sweep", "phase", "tsweep"):
        h = sub.add_parser(name, help=f"run a {name} from a key=value config file")
        h.add_argument("config")
        for key in ("kind", "m_grid", "link", "set_x", "set_v", "out", "t_grid",
                    "axis", "axis_grid"):
            h.add_argument(f"--{key.replace('_', '-')}", dest=f"opt_{key}")
        for key in ("n", "s", "k", "trials", "seed"):
            h.add_argument(f"--{key}", dest=f"opt_{key}")
        h.add_argument("--amplitude", dest="opt_amplitude")
        h.add_argument("--radius-scale", dest="opt_radius_scale")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            _cmd_gen(args)
        elif args.command == "solve":
            _cmd_solve(args)
        elif args.command == "width":
            _cmd_width(args)
        elif args.command == "complexity":
            _cmd_width(args, complexity=True)
        elif args.command == "local-width":
            _cmd_width(args, local=True)
        elif args.command == "cone-width":
            _cmd_cone_width(args)
        elif args.command == "rsv-check":
            _cmd_rsv_check(args)
        elif args.command == "sweep":
            _cmd_harness(args, "sweep")
        elif args.command == "phase":
            _cmd_harness(args, "phase")
        elif args.command == "tsweep":
            _cmd_harness(args, "tsweep")
    except (InvalidSpecError, InvalidLinkError, UnboundedSetError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailureError, NotSubGaussianError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
