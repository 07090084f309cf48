"""Error norms and mesh-discrepancy metrics for mesh comparisons.

Relative errors are measured against the reference solution in the L2 norm
of the function and of its derivative.  Error integrals run over the union
refinement of the trial mesh with a dense uniform grid so the kinks of the
piecewise-affine function never straddle a quadrature cell.

Node discrepancies between two meshes with the same cell count are averaged
over the interior nodes (RMS for the quadratic norm), which keeps values
comparable across cell counts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidComparisonError, InvalidParameterError, UndefinedRelativeErrorWarning
from .exact import ExactSolution
from .mesh import Mesh, PiecewiseAffine
from .quadrature import DEFAULT_RULE, QuadratureRule, gauss_points

UNION_GRID_CELLS = 4096
_DEDUPE_FACTOR = 1e-13


def _union_partition(mesh: Mesh, a, b):
    pts = np.union1d(mesh.nodes, np.linspace(a, b, UNION_GRID_CELLS + 1))
    keep = np.concatenate(([True], np.diff(pts) > _DEDUPE_FACTOR * (b - a)))
    pts = pts[keep]
    pts[0], pts[-1] = a, b
    return pts


def _relative_l2(num_vals, den_vals, w):
    num = float(np.sum(np.sum(num_vals * num_vals * w, axis=1)))
    den = float(np.sum(np.sum(den_vals * den_vals * w, axis=1)))
    if den == 0.0:
        warnings.warn(
            "reference norm is zero; returning the absolute error",
            UndefinedRelativeErrorWarning,
            stacklevel=3,
        )
        return float(np.sqrt(num))
    return float(np.sqrt(num) / np.sqrt(den))


def rel_l2_error(u_n: PiecewiseAffine, exact: ExactSolution, rule: QuadratureRule = DEFAULT_RULE) -> float:
    """``||u_ref - u_n|| / ||u_ref||`` in L2 (absolute error if the norm is zero)."""
    x, w = gauss_points(_union_partition(u_n.mesh, exact.a, exact.b), rule)
    ref = np.asarray(exact.u(x), dtype=float)
    return _relative_l2(ref - u_n(x), ref, w)


def rel_h1_error(u_n: PiecewiseAffine, exact: ExactSolution, rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Same ratio for the derivatives (the energy seminorm)."""
    x, w = gauss_points(_union_partition(u_n.mesh, exact.a, exact.b), rule)
    ref = np.asarray(exact.u.deriv1(x), dtype=float)
    return _relative_l2(ref - u_n.deriv(x), ref, w)


def node_discrepancy(mesh_a: Mesh, mesh_b: Mesh, norm: str = "l2") -> float:
    """Averaged interior-node distance between two meshes of equal cell count."""
    if mesh_a.n != mesh_b.n:
        raise InvalidComparisonError(
            f"meshes have different cell counts: {mesh_a.n} vs {mesh_b.n}"
        )
    if norm not in ("l1", "l2"):
        raise InvalidParameterError(f"norm must be 'l1' or 'l2', got {norm!r}")
    if mesh_a.n < 2:
        return 0.0
    d = mesh_a.interior - mesh_b.interior
    m = d.size
    if norm == "l1":
        return float(np.sum(np.abs(d)) / m)
    return float(np.sqrt(np.sum(d * d) / m))


@dataclass
class ComparisonRow:
    """One (cell count, meshing method) entry of a comparison sweep."""

    n: int
    method: str
    rel_l2: float
    rel_h1: float
    renormalized_energy: float
    node_discrepancy_l2: float | None = None
    node_discrepancy_l1: float | None = None

    CSV_HEADER = "n,method,rel_l2,rel_h1,energy,disc_l2,disc_l1"

    def __post_init__(self):
        for name in ("rel_l2", "rel_h1", "renormalized_energy"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < -1e-12:
                raise InvalidParameterError(f"{name} must be finite and nonnegative, got {v}")
            setattr(self, name, max(v, 0.0))

    def csv_row(self):
        disc2 = "" if self.node_discrepancy_l2 is None else repr(self.node_discrepancy_l2)
        disc1 = "" if self.node_discrepancy_l1 is None else repr(self.node_discrepancy_l1)
        return (
            f"{self.n},{self.method},{self.rel_l2!r},{self.rel_h1!r},"
            f"{self.renormalized_energy!r},{disc2},{disc1}"
        )
