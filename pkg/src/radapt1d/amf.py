"""Asymptotic optimal meshes from the equidistribution map.

The map ``y(x) = int_a^x |f|**(2/3) / int_a^b |f|**(2/3)`` sends the domain
onto [0, 1]; the n-cell mesh is read off by solving ``y(node_i) = i/n`` for
the interior nodes.  Cell lengths come out inversely proportional to the
density, so nodes concentrate where ``|f|`` (equivalently, the curvature of
the reference solution) is large, and every cell carries the same share of
``int |f|**(2/3)``.

Inversion is a bisection on the tabulated map followed by one Newton
correction against the true density, which brings node placement to
rounding accuracy at the default table resolution.  Where the density
vanishes on a subinterval the map has a plateau and the inverse is
multivalued; targets landing on a plateau are placed at its midpoint
(several targets on one plateau are spread uniformly across it), which is
energy-indifferent and deterministic.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import DegenerateDensityWarning, InvalidParameterError, MeshResolutionWarning
from .mesh import MIN_CELL_FACTOR, Mesh, uniform_mesh
from .quadrature import (
    DEFAULT_RULE,
    QuadratureRule,
    _gauss_nodes,
    cumulative_on_grid,
    graded_partition_around_zeros,
    integrate,
)

_PLATEAU_FACTOR = 1e-9
_SNAP_WARN_FRACTION = 1e-3
_TABLE_MIN_SAMPLES = 4096
_TABLE_SAMPLES_PER_CELL = 64


class MonotoneMap:
    """Tabulated nondecreasing map of [a, b] onto [0, 1] with pseudo-inverse."""

    plateau_policy = "plateau midpoint; multiple targets spread uniformly"

    __slots__ = ("grid", "values", "degenerate", "_density", "_order", "_vtol")

    def __init__(self, grid, values, degenerate=False, density=None, order=5):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1 or grid.size < 2:
            raise InvalidParameterError("map table needs matching 1D grid and values")
        if np.any(np.diff(values) < 0.0):
            raise InvalidParameterError("map values must be nondecreasing")
        grid.setflags(write=False)
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.degenerate = bool(degenerate)
        self._density = density
        self._order = order
        # rounding envelope of the cumulative table; plateau levels may sit a
        # few ulps off the exact target
        self._vtol = 4.0 * np.finfo(float).eps * grid.size

    @property
    def a(self):
        return float(self.grid[0])

    @property
    def b(self):
        return float(self.grid[-1])

    def _panel(self, lo_idx, x):
        """Density integral from ``grid[lo_idx]`` to x (one Gauss panel each)."""
        tg, wg = _gauss_nodes(self._order)
        lo = self.grid[lo_idx]
        mid = 0.5 * (lo + x)
        half = 0.5 * (x - lo)
        pts = mid[:, None] + half[:, None] * tg[None, :]
        return np.sum(self._density(pts) * wg[None, :], axis=1) * half

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xx = np.atleast_1d(x)
        if self._density is None or self.degenerate:
            out = np.interp(xx, self.grid, self.values)
        else:
            # anchor at the table and integrate the density across the last
            # partial interval; plain linear interpolation of the table is
            # only second-order accurate in the table spacing
            j = np.clip(np.searchsorted(self.grid, xx, side="right") - 1, 0, self.grid.size - 2)
            out = np.clip(self.values[j] + self._panel(j, xx), 0.0, 1.0)
        return float(out[0]) if scalar else out

    def _preimage(self, t):
        """Interval ``[x_lo, x_hi]`` mapped onto level t (vectorized).

        Levels are matched within the table's rounding envelope, so a target
        that sits a few ulps off a plateau value still resolves to the whole
        plateau.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        v, x = self.values, self.grid
        t_lo = t - self._vtol
        t_hi = t + self._vtol
        jl = np.searchsorted(v, t_lo, side="left")
        jr = np.searchsorted(v, t_hi, side="right")
        x_lo = np.empty_like(t)
        x_hi = np.empty_like(t)

        at_start = jl == 0
        x_lo[at_start] = x[0]
        j = jl[~at_start]
        dv = v[j] - v[j - 1]
        x_lo[~at_start] = x[j - 1] + (t_lo[~at_start] - v[j - 1]) / dv * (x[j] - x[j - 1])

        at_end = jr == v.size
        x_hi[at_end] = x[-1]
        k = jr[~at_end]
        kk = np.maximum(k, 1)
        dv = v[kk] - v[kk - 1]
        frac = np.where(dv > 0.0, (t_hi[~at_end] - v[kk - 1]) / np.where(dv > 0.0, dv, 1.0), 0.0)
        x_hi[~at_end] = np.where(k == 0, x[0], x[kk - 1] + frac * (x[kk] - x[kk - 1]))
        return x_lo, np.maximum(x_hi, x_lo)

    def _newton_correct(self, t, x_hat):
        """One correction step against the true density integral."""
        if self._density is None or self.degenerate:
            return x_hat
        x = self.grid
        v = self.values
        j = np.clip(np.searchsorted(x, x_hat, side="right") - 1, 0, x.size - 2)
        resid = v[j] + self._panel(j, x_hat) - t
        rho = np.asarray(self._density(x_hat), dtype=float)
        step = np.where(rho > 0.0, resid / np.where(rho > 0.0, rho, 1.0), 0.0)
        # reject corrections that jump out of the local table neighborhood
        spacing = x[j + 1] - x[j]
        step = np.where(np.abs(step) <= 2.0 * spacing, step, 0.0)
        return np.clip(x_hat - step, x[0], x[-1])

    def inverse(self, t):
        """Pseudo-inverse of the map; plateau levels resolve to the midpoint."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        if np.any(tt < 0.0) or np.any(tt > 1.0):
            raise InvalidParameterError("inverse levels must lie in [0, 1]")
        x_lo, x_hi = self._preimage(tt)
        mid = 0.5 * (x_lo + x_hi)
        plateau = (x_hi - x_lo) > _PLATEAU_FACTOR * (self.b - self.a)
        out = mid.copy()
        if np.any(~plateau):
            out[~plateau] = self._newton_correct(tt[~plateau], mid[~plateau])
        return float(out[0]) if scalar else out


def _table_samples(n_hint):
    return max(_TABLE_MIN_SAMPLES, _TABLE_SAMPLES_PER_CELL * int(n_hint))


def asymptotic_map(
    f,
    a=0.0,
    b=1.0,
    rule: QuadratureRule = DEFAULT_RULE,
    samples=None,
    n_hint=0,
) -> MonotoneMap:
    """Normalized cumulative of ``|f|**(2/3)``, tabulated densely.

    A forcing that vanishes identically gives a degenerate map (flagged, and
    falling back to the identity distribution) since any node placement is
    then optimal.
    """
    a, b = float(a), float(b)
    if samples is None:
        samples = _table_samples(n_hint)
    # dense graded tables need no per-interval subdivision
    rule = QuadratureRule(order=rule.order)

    def density(x):
        return np.abs(f(x)) ** (2.0 / 3.0)

    grid = graded_partition_around_zeros(f, a, b, samples)
    cum = cumulative_on_grid(density, grid, rule)
    np.maximum.accumulate(cum, out=cum)
    total = cum[-1]
    if total <= 0.0:
        warnings.warn(
            f"density of {getattr(f, 'label', '') or '<anonymous>'} integrates to zero; "
            "mesh map degenerates to uniform",
            DegenerateDensityWarning,
            stacklevel=2,
        )
        values = (grid - a) / (b - a)
        return MonotoneMap(grid, values, degenerate=True, order=rule.order)
    values = np.clip(cum / total, 0.0, 1.0)
    values[0] = 0.0
    values[-1] = 1.0

    def normalized_density(x):
        return density(x) / total

    return MonotoneMap(grid, values, density=normalized_density, order=rule.order)


def _snap_min_spacing(nodes, eps):
    """Enforce minimal spacing by a forward/backward sweep; returns total shift."""
    orig = nodes.copy()
    idx = np.arange(nodes.size)
    nodes = np.maximum.accumulate(nodes - idx * eps) + idx * eps
    rev = nodes[::-1] + idx * eps
    nodes = (np.minimum.accumulate(rev) - idx * eps)[::-1]
    return nodes, float(np.sum(np.abs(nodes - orig)))


def amf_mesh(mmap: MonotoneMap, n) -> Mesh:
    """Extract the n-cell mesh whose interior nodes solve ``map(x) = i/n``."""
    n = int(n)
    if n < 1:
        raise InvalidParameterError(f"cell count must be >= 1, got {n}")
    a, b = mmap.a, mmap.b
    if mmap.degenerate:
        warnings.warn(
            "degenerate mesh density; returning the uniform mesh",
            DegenerateDensityWarning,
            stacklevel=2,
        )
        return uniform_mesh(n, a, b)
    if n == 1:
        return Mesh([a, b])

    targets = np.arange(1, n) / n
    x_lo, x_hi = mmap._preimage(targets)
    width = x_hi - x_lo
    plateau = width > _PLATEAU_FACTOR * (b - a)
    nodes = 0.5 * (x_lo + x_hi)
    if np.any(~plateau):
        nodes[~plateau] = mmap._newton_correct(targets[~plateau], nodes[~plateau])
    if np.any(plateau):
        # group consecutive targets that landed on the same plateau and
        # spread each group uniformly across it
        ids = np.flatnonzero(plateau)
        tol = _PLATEAU_FACTOR * (b - a)
        group = [ids[0]]
        groups = []
        for i in ids[1:]:
            if i == group[-1] + 1 and abs(x_lo[i] - x_lo[group[0]]) <= tol:
                group.append(i)
            else:
                groups.append(group)
                group = [i]
        groups.append(group)
        for group in groups:
            lo, hi = x_lo[group[0]], x_hi[group[0]]
            k = len(group)
            nodes[group] = lo + (hi - lo) * (np.arange(1, k + 1) / (k + 1.0))

    all_nodes = np.concatenate(([a], nodes, [b]))
    eps = MIN_CELL_FACTOR * (b - a)
    snapped, shift = _snap_min_spacing(all_nodes, eps)
    if shift > _SNAP_WARN_FRACTION * (b - a):
        warnings.warn(
            f"node snapping moved points by {shift:g} total; the mesh map table "
            "may be under-resolved for this cell count",
            MeshResolutionWarning,
            stacklevel=2,
        )
    return Mesh(snapped)


def optimal_density(f, a=0.0, b=1.0, rule: QuadratureRule = DEFAULT_RULE):
    """Density ``(b-a) |f|**(2/3) / int |f|**(2/3)`` minimizing the limit energy."""
    a, b = float(a), float(b)
    part = graded_partition_around_zeros(f, a, b, _TABLE_MIN_SAMPLES + 1)
    total = integrate(lambda x: np.abs(f(x)) ** (2.0 / 3.0), part, rule)
    if total <= 0.0:
        raise InvalidParameterError("cannot normalize a density that integrates to zero")
    scale = (b - a) / total

    def density(x):
        return np.abs(f(x)) ** (2.0 / 3.0) * scale

    return density
