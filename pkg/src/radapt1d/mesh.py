"""Meshes of an interval and continuous piecewise-affine functions on them.

Cells are half-open ``[nodes[i], nodes[i+1])``; lookups at interior nodes
resolve to the right cell, so piecewise-constant derivatives are
right-continuous.  Meshes enforce a minimal cell length
``MIN_CELL_FACTOR * (b - a)`` because downstream energies contain
``1/length**2``-type terms and a collapsed cell is the degenerate case that
is excluded at finite resolution.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError, OutOfDomainError

MIN_CELL_FACTOR = 1e-12


class Mesh:
    """Strictly increasing nodes ``a = x_0 < x_1 < ... < x_n = b``."""

    __slots__ = ("nodes",)

    def __init__(self, nodes):
        nodes = np.array(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise InvalidParameterError("a mesh needs at least two nodes")
        if not np.all(np.isfinite(nodes)):
            raise InvalidParameterError("mesh nodes must be finite")
        eps = MIN_CELL_FACTOR * (nodes[-1] - nodes[0])
        if nodes[-1] <= nodes[0] or np.any(np.diff(nodes) < eps):
            raise InvalidParameterError(
                f"mesh nodes must be strictly increasing with spacing >= {eps:g}"
            )
        nodes.setflags(write=False)
        self.nodes = nodes

    @property
    def a(self):
        return float(self.nodes[0])

    @property
    def b(self):
        return float(self.nodes[-1])

    @property
    def n(self):
        """Number of cells."""
        return self.nodes.size - 1

    @property
    def widths(self):
        return np.diff(self.nodes)

    @property
    def interior(self):
        return self.nodes[1:-1]

    def min_cell(self):
        return float(np.min(self.widths))

    def cell_index(self, x):
        """Index of the half-open cell containing x; right cell at ties."""
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        idx = np.searchsorted(self.nodes, x, side="right") - 1
        return np.clip(idx, 0, self.n - 1)

    def _check_domain(self, x):
        slack = MIN_CELL_FACTOR * (self.b - self.a)
        if np.any(x < self.a - slack) or np.any(x > self.b + slack):
            bad = np.asarray(x)[(np.asarray(x) < self.a - slack) | (np.asarray(x) > self.b + slack)]
            raise OutOfDomainError(
                f"evaluation at x={np.ravel(bad)[0]!r} outside [{self.a}, {self.b}]"
            )

    def __len__(self):
        return self.nodes.size

    def __eq__(self, other):
        return isinstance(other, Mesh) and np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())

    def __repr__(self):
        return f"Mesh(n={self.n}, domain=({self.a}, {self.b}))"


def uniform_mesh(n, a=0.0, b=1.0):
    """Equispaced mesh with n cells on [a, b]."""
    n = int(n)
    if n < 1:
        raise InvalidParameterError(f"cell count must be >= 1, got {n}")
    if not a < b:
        raise InvalidParameterError(f"need a < b, got a={a}, b={b}")
    return Mesh(np.linspace(a, b, n + 1))


class PiecewiseAffine:
    """A mesh plus one nodal value per node; continuous, affine per cell."""

    __slots__ = ("mesh", "values")

    def __init__(self, mesh: Mesh, values):
        values = np.array(values, dtype=float)
        if values.shape != mesh.nodes.shape:
            raise InvalidParameterError(
                f"need one value per node: {values.size} values, {mesh.nodes.size} nodes"
            )
        values.setflags(write=False)
        self.mesh = mesh
        self.values = values

    @property
    def slopes(self):
        return np.diff(self.values) / self.mesh.widths

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        self.mesh._check_domain(x)
        return np.interp(x, self.mesh.nodes, self.values)

    def deriv(self, x):
        """Slope of the containing cell (right-continuous at interior nodes)."""
        idx = self.mesh.cell_index(x)
        return self.slopes[idx]

    def __repr__(self):
        return f"PiecewiseAffine(n={self.mesh.n}, domain=({self.mesh.a}, {self.mesh.b}))"


def interpolate(field, mesh: Mesh) -> PiecewiseAffine:
    """Nodal interpolant of a field on the given mesh."""
    return PiecewiseAffine(mesh, field(mesh.nodes))


def mesh_to_csv(mesh: Mesh, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x\n")
        for x in mesh.nodes:
            fh.write(f"{float(x)!r}\n")


def mesh_from_csv(path) -> Mesh:
    data = np.loadtxt(path, skiprows=1, ndmin=1)
    return Mesh(data)


def pa_to_csv(u: PiecewiseAffine, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,u\n")
        for x, v in zip(u.mesh.nodes, u.values):
            fh.write(f"{float(x)!r},{float(v)!r}\n")


def pa_from_csv(path) -> PiecewiseAffine:
    data = np.loadtxt(path, skiprows=1, delimiter=",", ndmin=2)
    return PiecewiseAffine(Mesh(data[:, 0]), data[:, 1])
