"""Experiment drivers: mesh comparisons, the limit-energy convergence check
and mesh dumps.

Each driver takes an :class:`ExperimentConfig`, writes CSV (and optionally
SVG) files atomically into the output directory and returns its rows, so
the same entry points serve the command line and the test suite.  Identical
configurations produce byte-identical CSV output.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .amf import amf_mesh, asymptotic_map
from .energy import min_limit_energy, renormalized_gap
from .errors import InvalidParameterError, Radapt1dError
from .exact import solve_exact
from .fem import galerkin_solve, resolved_rule
from .fields import DirichletLagrangian, parse_field_spec
from .gd import GdConfig, amf_init, gd_run
from .mesh import interpolate, mesh_to_csv, uniform_mesh
from .metrics import ComparisonRow, node_discrepancy, rel_h1_error, rel_l2_error
from .quadrature import QuadratureRule
from .svgplot import Series, line_plot

_METHOD_ORDER = ("equi", "amf", "gd")

# Sweep default; the per-run GdConfig default of 100000 is meant for single
# runs, a full (f, n) sweep at desk scale needs a tighter budget.
SWEEP_MAX_ITER = 20000

GAMMA_CSV_HEADER = "n,energy_gd,min_limit,ratio"


@dataclass
class ExperimentConfig:
    """Sweep configuration shared by the drivers.

    ``eta=None`` selects a stability-bound step per run (see
    :func:`auto_eta`); ``max_iter=None`` selects ``SWEEP_MAX_ITER``.
    """

    f_spec: str
    n_list: tuple = ()
    methods: tuple = _METHOD_ORDER
    eta: float | None = None
    tol: float = 1e-6
    max_iter: int | None = None
    out_dir: str = "."
    plot: bool = False
    seed: int = 0
    domain: tuple = (0.0, 1.0)
    quad_order: int = 5

    def __post_init__(self):
        self.n_list = tuple(int(n) for n in self.n_list)
        if not self.n_list or any(n < 2 for n in self.n_list):
            raise InvalidParameterError("n_list must be nonempty with every entry >= 2")
        requested = tuple(self.methods)
        unknown = set(requested) - set(_METHOD_ORDER)
        if unknown:
            raise InvalidParameterError(f"unknown methods: {sorted(unknown)}")
        self.methods = tuple(m for m in _METHOD_ORDER if m in requested)
        if not self.methods:
            raise InvalidParameterError("methods must not be empty")
        self.domain = (float(self.domain[0]), float(self.domain[1]))
        parse_field_spec(self.f_spec, domain=self.domain)  # fail early on bad specs

    def field(self):
        return parse_field_spec(self.f_spec, domain=self.domain)

    def rule_for(self, f):
        return resolved_rule(f, QuadratureRule(order=int(self.quad_order)))


def auto_eta(xi, a, b, n) -> float:
    """Stability-bound step from the value-block stiffness of the init mesh.

    A Gershgorin bound on the renormalized Hessian's value block gives
    ``n**2 * 2 * max(1/h_left + 1/h_right)``; stepping at 1.5 over that bound
    keeps the descent stable without per-iteration halving.
    """
    h = np.diff(np.concatenate(([a], np.asarray(xi, dtype=float), [b])))
    if h.size < 2:
        return 0.1 / float(n * n)
    bound = float(n * n) * 2.0 * float(np.max(1.0 / h[:-1] + 1.0 / h[1:]))
    return 1.5 / bound


def _gd_state(f, n, exact, rule, cfg: ExperimentConfig, mmap=None):
    init = amf_init(f, n, exact, rule, mmap=mmap)
    eta = cfg.eta if cfg.eta is not None else auto_eta(init.xi, exact.a, exact.b, n)
    max_iter = cfg.max_iter if cfg.max_iter is not None else SWEEP_MAX_ITER
    gd_cfg = GdConfig(eta=eta, tol=cfg.tol, max_iter=max_iter)
    state, _ = gd_run(f, init, gd_cfg, exact, rule)
    return state


def write_text_atomic(path, text):
    """Write via a sibling temp file and rename, so partial runs stay clean."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_compare(cfg: ExperimentConfig):
    """Build each requested mesh per cell count, solve, and collect metrics.

    Writes ``compare.csv`` (and log-log error plots with ``plot=True``);
    returns the rows.  A gradient-descent run that fails to converge is
    recorded in its row, not fatal.
    """
    a, b = cfg.domain
    f = cfg.field()
    rule = cfg.rule_for(f)
    L = DirichletLagrangian(f)
    exact = solve_exact(f, a, b, rule)
    mmap = None
    if "amf" in cfg.methods or "gd" in cfg.methods:
        mmap = asymptotic_map(f, a, b, rule, n_hint=max(cfg.n_list))

    rows = []
    for n in cfg.n_list:
        built = {}
        if "equi" in cfg.methods:
            mesh = uniform_mesh(n, a, b)
            built["equi"] = (mesh, galerkin_solve(f, mesh, rule), None)
        if "amf" in cfg.methods or "gd" in cfg.methods:
            amf_grid = amf_mesh(mmap, n)
            if "amf" in cfg.methods:
                built["amf"] = (amf_grid, galerkin_solve(f, amf_grid, rule), None)
        if "gd" in cfg.methods:
            state = _gd_state(f, n, exact, rule, cfg, mmap=mmap)
            built["gd"] = (state.mesh(a, b), state.trial_function(a, b), state)

        gd_mesh = built["gd"][0] if "gd" in built else None
        for method in cfg.methods:
            mesh, u, state = built[method]
            if state is not None:
                energy = state.energy
            else:
                energy = renormalized_gap(L, u, exact, n, rule).renormalized
            disc2 = disc1 = None
            if gd_mesh is not None:
                disc2 = node_discrepancy(mesh, gd_mesh, "l2")
                disc1 = node_discrepancy(mesh, gd_mesh, "l1")
            rows.append(
                ComparisonRow(
                    n=n,
                    method=method,
                    rel_l2=rel_l2_error(u, exact, rule),
                    rel_h1=rel_h1_error(u, exact, rule),
                    renormalized_energy=energy,
                    node_discrepancy_l2=disc2,
                    node_discrepancy_l1=disc1,
                )
            )

    out_dir = Path(cfg.out_dir)
    text = ComparisonRow.CSV_HEADER + "\n" + "".join(r.csv_row() + "\n" for r in rows)
    write_text_atomic(out_dir / "compare.csv", text)

    if cfg.plot:
        ns = np.asarray(cfg.n_list, dtype=float)
        for attr, fname, label in (
            ("rel_l2", "compare_rel_l2.svg", "relative L2 error"),
            ("rel_h1", "compare_rel_h1.svg", "relative H1 error"),
        ):
            series = [
                Series(m, ns, np.array([getattr(r, attr) for r in rows if r.method == m]))
                for m in cfg.methods
            ]
            svg = line_plot(series, xlabel="cells n", ylabel=label,
                            title=f"{cfg.f_spec}: {label} vs n", loglog=True)
            write_text_atomic(out_dir / fname, svg)
    return rows


@dataclass
class GammaRow:
    n: int
    energy_gd: float
    min_limit: float
    ratio: float

    def csv_row(self):
        return f"{self.n},{self.energy_gd!r},{self.min_limit!r},{self.ratio!r}"


def run_gamma_check(cfg: ExperimentConfig):
    """Check that optimized renormalized energies approach the limit minimum.

    Verdict PASS when the energy/limit ratios are nonincreasing (up to 1e-3
    jitter) and within 5% of 1 at the largest cell count; INCONCLUSIVE when
    there is no trend to read (a single cell count, or a failed descent).
    Writes ``gamma_check.csv``.
    """
    a, b = cfg.domain
    f = cfg.field()
    rule = cfg.rule_for(f)
    limit = min_limit_energy(f, a, b, rule)
    exact = solve_exact(f, a, b, rule)
    mmap = asymptotic_map(f, a, b, rule, n_hint=max(cfg.n_list))

    rows = []
    failed = None
    for n in cfg.n_list:
        try:
            state = _gd_state(f, n, exact, rule, cfg, mmap=mmap)
        except Radapt1dError as exc:
            failed = f"descent failed at n={n}: {exc}"
            break
        if state.status == "stalled":
            failed = f"descent stalled at n={n}"
            break
        ratio = state.energy / limit if limit > 0.0 else math.inf
        rows.append(GammaRow(n=n, energy_gd=state.energy, min_limit=limit, ratio=ratio))

    if failed is not None or len(rows) < 2:
        verdict = "INCONCLUSIVE"
        diagnostics = failed or "need at least two cell counts for a trend"
    else:
        ratios = [r.ratio for r in rows]
        monotone = all(r2 <= r1 + 1e-3 for r1, r2 in zip(ratios, ratios[1:]))
        close = abs(ratios[-1] - 1.0) <= 0.05
        verdict = "PASS" if (monotone and close) else "FAIL"
        diagnostics = f"final ratio {ratios[-1]:.6g}, monotone={monotone}"

    text = GAMMA_CSV_HEADER + "\n" + "".join(r.csv_row() + "\n" for r in rows)
    write_text_atomic(Path(cfg.out_dir) / "gamma_check.csv", text)
    return rows, verdict, diagnostics


def run_mesh_dump(cfg: ExperimentConfig, dense_points=513):
    """Dump the equidistributed mesh, the interpolant on it and the reference.

    Writes ``amf_nodes.csv``, ``interpolant.csv`` and ``exact.csv`` (plus an
    overlay SVG with ``plot=True``).
    """
    a, b = cfg.domain
    n = cfg.n_list[0]
    f = cfg.field()
    rule = cfg.rule_for(f)
    exact = solve_exact(f, a, b, rule)
    mesh = amf_mesh(asymptotic_map(f, a, b, rule, n_hint=n), n)
    u = interpolate(exact.u, mesh)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    mesh_to_csv(mesh, out_dir / "amf_nodes.csv")
    pa_text = "x,u\n" + "".join(
        f"{float(x)!r},{float(v)!r}\n" for x, v in zip(mesh.nodes, u.values)
    )
    write_text_atomic(out_dir / "interpolant.csv", pa_text)
    xs = np.linspace(a, b, dense_points)
    ex_text = "x,u\n" + "".join(
        f"{float(x)!r},{float(v)!r}\n" for x, v in zip(xs, exact.u(xs))
    )
    write_text_atomic(out_dir / "exact.csv", ex_text)

    if cfg.plot:
        series = [
            Series("reference", xs, exact.u(xs)),
            Series(f"interpolant (n={n})", mesh.nodes, u.values),
        ]
        svg = line_plot(series, xlabel="x", ylabel="u",
                        title=f"{cfg.f_spec}: adapted mesh, n={n}")
        write_text_atomic(out_dir / "mesh_dump.svg", svg)
    return mesh, u


def parse_config_file(path):
    """Flat ``key=value`` lines; ``#`` comments and blank lines ignored."""
    mapping = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise InvalidParameterError(
                    f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}"
                )
            mapping[key.strip()] = value.strip()
    return mapping
