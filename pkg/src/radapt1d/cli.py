"""Command-line driver.

Subcommands: solve, fem, amf, gd, energy, compare, gamma-check, mesh-dump.
Global flags (``--domain``, ``--quad-order``, ``--out-dir``, ``--config``,
``--plot``) may appear before or after the subcommand; values from a
``--config`` file are used where no flag was given explicitly.

Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 gamma-check FAIL.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .amf import amf_mesh, asymptotic_map
from .energy import EnergyReport, renormalized_gap
from .errors import Radapt1dError
from .exact import solve_exact
from .fem import galerkin_solve, resolved_rule
from .fields import DirichletLagrangian, parse_field_spec
from .gd import GdConfig, amf_init, gd_run, uniform_init
from .mesh import uniform_mesh
from .quadrature import QuadratureRule


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(parser):
    parser.add_argument("--domain", default=None, help="interval as 'a,b' (default 0,1)")
    parser.add_argument("--quad-order", type=int, default=None, help="Gauss points per cell")
    parser.add_argument("--out-dir", default=None, help="output directory (default .)")
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--plot", action="store_true", default=None, help="write SVG plots")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common)
    parser = _Parser(prog="radapt1d", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="dump the reference solution")
    p.add_argument("--f", dest="f_spec", default=None)
    p.add_argument("--grid", type=int, default=None, help="sample count (default 257)")
    p.add_argument("--out", default=None)

    p = sub.add_parser("fem", parents=[common], help="Galerkin solve on a mesh")
    p.add_argument("--f", dest="f_spec", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--mesh", choices=("uniform", "amf"), default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("amf", parents=[common], help="equidistributed mesh nodes")
    p.add_argument("--f", dest="f_spec", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--map-out", default=None, help="also dump the (x, y(x)) table")

    p = sub.add_parser("gd", parents=[common], help="joint node/value descent")
    p.add_argument("--f", dest="f_spec", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--init", choices=("amf", "uniform"), default=None)
    p.add_argument("--trace", default=None, help="per-iteration CSV")
    p.add_argument("--nodes", default=None, help="final node CSV")

    p = sub.add_parser("energy", parents=[common], help="renormalized energy report")
    p.add_argument("--f", dest="f_spec", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--mesh", choices=("uniform", "amf", "gd"), default=None)

    p = sub.add_parser("compare", parents=[common], help="method comparison sweep")
    p.add_argument("--f", dest="f_spec", default=None)
    p.add_argument("--n-list", default=None, help="comma-separated cell counts")
    p.add_argument("--methods", default=None, help="subset of equi,amf,gd")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("gamma-check", parents=[common], help="limit-energy convergence check")
    p.add_argument("--f", dest="f_spec", default=None)
    p.add_argument("--n-list", default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)

    p = sub.add_parser("mesh-dump", parents=[common], help="adapted mesh overlay dump")
    p.add_argument("--f", dest="f_spec", default=None)
    p.add_argument("--n", type=int, default=None)

    return parser


_CONFIG_CASTS = {
    "n": int,
    "grid": int,
    "quad_order": int,
    "max_iter": int,
    "seed": int,
    "eta": float,
    "tol": float,
    "plot": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
}


_CONFIG_ALIASES = {"f": "f_spec"}


def _fill_from_config(args, mapping):
    for key, raw in mapping.items():
        dest = key.replace("-", "_")
        dest = _CONFIG_ALIASES.get(dest, dest)
        if not hasattr(args, dest) or getattr(args, dest) is not None:
            continue
        cast = _CONFIG_CASTS.get(dest, str)
        setattr(args, dest, cast(raw))


def _setdefaults(args, **defaults):
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _domain(args):
    a_s, b_s = str(args.domain).split(",")
    return float(a_s), float(b_s)


def _parse_int_list(text):
    return tuple(int(t) for t in str(text).split(",") if t.strip())


def _experiment_config(args, need_n_list=True):
    n_list = _parse_int_list(args.n_list) if need_n_list else (args.n,)
    methods = tuple(str(getattr(args, "methods", None) or "equi,amf,gd").split(","))
    return experiments.ExperimentConfig(
        f_spec=args.f_spec,
        n_list=n_list,
        methods=methods,
        eta=getattr(args, "eta", None),
        tol=getattr(args, "tol", None) or 1e-6,
        max_iter=getattr(args, "max_iter", None),
        out_dir=args.out_dir,
        plot=bool(args.plot),
        seed=getattr(args, "seed", None) or 0,
        domain=_domain(args),
        quad_order=args.quad_order,
    )


def _require(args, *keys):
    for key in keys:
        if getattr(args, key, None) is None:
            raise UsageError(f"missing required option --{key.replace('_', '-')}")


def _out_path(args, name):
    out = getattr(args, "out", None)
    path = Path(out) if out else Path(args.out_dir) / name
    if not path.is_absolute() and out:
        path = Path(args.out_dir) / path
    return path


def _cmd_solve(args):
    _require(args, "f_spec")
    _setdefaults(args, grid=257)
    a, b = _domain(args)
    f = parse_field_spec(args.f_spec, domain=(a, b))
    rule = resolved_rule(f, QuadratureRule(order=args.quad_order))
    exact = solve_exact(f, a, b, rule)
    xs = np.linspace(a, b, args.grid)
    lines = ["x,u,du,d2u"]
    u, du, d2u = exact.u(xs), exact.u.deriv1(xs), exact.u.deriv2(xs)
    lines += [
        f"{float(x)!r},{float(v)!r},{float(dv)!r},{float(d2v)!r}"
        for x, v, dv, d2v in zip(xs, u, du, d2u)
    ]
    experiments.write_text_atomic(_out_path(args, "solve.csv"), "\n".join(lines) + "\n")
    return 0


def _build_mesh(kind, f, n, a, b, rule, exact=None, args=None):
    if kind == "uniform":
        return uniform_mesh(n, a, b)
    if kind == "amf":
        return amf_mesh(asymptotic_map(f, a, b, rule, n_hint=n), n)
    state = _gd_final(f, n, a, b, rule, exact, args)
    return state.mesh(a, b)


def _gd_final(f, n, a, b, rule, exact, args):
    init = amf_init(f, n, exact, rule)
    eta = getattr(args, "eta", None)
    if eta is None:
        eta = experiments.auto_eta(init.xi, a, b, n)
    cfg = GdConfig(
        eta=eta,
        tol=getattr(args, "tol", None) or 1e-6,
        max_iter=getattr(args, "max_iter", None) or experiments.SWEEP_MAX_ITER,
    )
    state, _ = gd_run(f, init, cfg, exact, rule)
    return state


def _cmd_fem(args):
    _require(args, "f_spec", "n")
    _setdefaults(args, mesh="uniform")
    a, b = _domain(args)
    f = parse_field_spec(args.f_spec, domain=(a, b))
    rule = resolved_rule(f, QuadratureRule(order=args.quad_order))
    mesh = _build_mesh(args.mesh, f, args.n, a, b, rule)
    u = galerkin_solve(f, mesh, rule)
    text = "x,u\n" + "".join(
        f"{float(x)!r},{float(v)!r}\n" for x, v in zip(mesh.nodes, u.values)
    )
    experiments.write_text_atomic(_out_path(args, "fem.csv"), text)
    return 0


def _cmd_amf(args):
    _require(args, "f_spec", "n")
    a, b = _domain(args)
    f = parse_field_spec(args.f_spec, domain=(a, b))
    rule = resolved_rule(f, QuadratureRule(order=args.quad_order))
    mmap = asymptotic_map(f, a, b, rule, n_hint=args.n)
    mesh = amf_mesh(mmap, args.n)
    text = "x\n" + "".join(f"{float(x)!r}\n" for x in mesh.nodes)
    experiments.write_text_atomic(_out_path(args, "nodes.csv"), text)
    if args.map_out:
        table = "x,y\n" + "".join(
            f"{float(x)!r},{float(y)!r}\n" for x, y in zip(mmap.grid, mmap.values)
        )
        experiments.write_text_atomic(Path(args.out_dir) / args.map_out, table)
    return 0


def _cmd_gd(args):
    _require(args, "f_spec", "n")
    _setdefaults(args, init="amf")
    a, b = _domain(args)
    f = parse_field_spec(args.f_spec, domain=(a, b))
    rule = resolved_rule(f, QuadratureRule(order=args.quad_order))
    exact = solve_exact(f, a, b, rule)
    init = amf_init(f, args.n, exact, rule) if args.init == "amf" else uniform_init(f, args.n, exact, rule)
    eta = args.eta if args.eta is not None else experiments.auto_eta(init.xi, a, b, args.n)
    cfg = GdConfig(eta=eta, tol=args.tol or 1e-6,
                   max_iter=args.max_iter or experiments.SWEEP_MAX_ITER)
    state, trace = gd_run(f, init, cfg, exact, rule)
    print(f"status={state.status} iters={state.iters} energy={state.energy!r} "
          f"gradnorm={state.grad_norm1!r}")
    if args.trace:
        trace.write_csv(Path(args.out_dir) / args.trace)
    if args.nodes:
        text = "x\n" + "".join(f"{float(x)!r}\n" for x in state.mesh(a, b).nodes)
        experiments.write_text_atomic(Path(args.out_dir) / args.nodes, text)
    return 0


def _cmd_energy(args):
    _require(args, "f_spec", "n")
    _setdefaults(args, mesh="uniform")
    a, b = _domain(args)
    f = parse_field_spec(args.f_spec, domain=(a, b))
    rule = resolved_rule(f, QuadratureRule(order=args.quad_order))
    exact = solve_exact(f, a, b, rule)
    if args.mesh == "gd":
        state = _gd_final(f, args.n, a, b, rule, exact, args)
        u = state.trial_function(a, b)
    else:
        mesh = _build_mesh(args.mesh, f, args.n, a, b, rule)
        u = galerkin_solve(f, mesh, rule)
    report = renormalized_gap(DirichletLagrangian(f), u, exact, args.n, rule)
    print(EnergyReport.CSV_HEADER)
    print(report.csv_row())
    return 0


def _cmd_compare(args):
    _require(args, "f_spec", "n_list")
    experiments.run_compare(_experiment_config(args))
    return 0


def _cmd_gamma_check(args):
    _require(args, "f_spec", "n_list")
    cfg = _experiment_config(args)
    rows, verdict, diagnostics = experiments.run_gamma_check(cfg)
    print(experiments.GAMMA_CSV_HEADER)
    for row in rows:
        print(row.csv_row())
    print(f"verdict: {verdict} ({diagnostics})")
    return 3 if verdict == "FAIL" else 0


def _cmd_mesh_dump(args):
    _require(args, "f_spec", "n")
    experiments.run_mesh_dump(_experiment_config(args, need_n_list=False))
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "fem": _cmd_fem,
    "amf": _cmd_amf,
    "gd": _cmd_gd,
    "energy": _cmd_energy,
    "compare": _cmd_compare,
    "gamma-check": _cmd_gamma_check,
    "mesh-dump": _cmd_mesh_dump,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            _fill_from_config(args, experiments.parse_config_file(args.config))
        _setdefaults(args, domain="0,1", quad_order=5, out_dir=".", plot=False)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Radapt1dError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
