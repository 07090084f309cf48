import numpy as np
import pytest

import radapt1d as r


@pytest.fixture(scope="session")
def rule():
    return r.QuadratureRule()


@pytest.fixture(scope="session")
def f_const1():
    return r.constant(1.0)


@pytest.fixture(scope="session")
def f_x2():
    return r.monomial(2)


@pytest.fixture(scope="session")
def f_gauss005():
    return r.gaussian(0.5, 0.05)


@pytest.fixture(scope="session")
def f_gauss01():
    return r.gaussian(0.5, 0.1)


@pytest.fixture(scope="session")
def exact_const1(f_const1):
    return r.solve_exact(f_const1)


@pytest.fixture(scope="session")
def exact_x2(f_x2):
    return r.solve_exact(f_x2)


@pytest.fixture(scope="session")
def exact_gauss005(f_gauss005):
    return r.solve_exact(f_gauss005)


@pytest.fixture(scope="session")
def exact_gauss01(f_gauss01):
    return r.solve_exact(f_gauss01)


def random_valid_mesh(rng, n, a=0.0, b=1.0, min_gap=1e-3):
    """Random strictly increasing mesh with a sane minimal spacing."""
    while True:
        interior = np.sort(rng.uniform(a, b, size=n - 1))
        nodes = np.concatenate(([a], interior, [b]))
        if np.min(np.diff(nodes)) >= min_gap * (b - a):
            return r.Mesh(nodes)


def graded_partition(a, b, levels=48):
    """Partition geometrically refined toward both endpoints; integrates
    endpoint power singularities to rounding accuracy."""
    off = (b - a) * 2.0 ** (-np.arange(1, levels + 1, dtype=float))
    pts = np.unique(np.concatenate(([a, b], a + off, b - off)))
    return pts[(pts >= a) & (pts <= b)]


def graded_mass(fn, a, b):
    """High-accuracy oracle integral of fn over [a, b]."""
    return r.integrate(fn, graded_partition(a, b), r.QuadratureRule(order=10))


def fd_gradient(f, xi, uvals, exact, rule):
    """Central finite differences of the discrete energy, step scaled to the
    local cell size for the node block."""
    m = xi.size
    out = np.zeros(2 * m)
    nodes = np.concatenate(([exact.a], xi, [exact.b]))
    h = np.diff(nodes)
    for i in range(m):
        step = 1e-7 * min(h[i], h[i + 1])
        xp, xm = xi.copy(), xi.copy()
        xp[i] += step
        xm[i] -= step
        out[i] = (
            r.discrete_energy(f, (xp, uvals), exact, rule)
            - r.discrete_energy(f, (xm, uvals), exact, rule)
        ) / (2 * step)
    for i in range(m):
        step = 1e-7 * max(1.0, abs(uvals[i]))
        up, um = uvals.copy(), uvals.copy()
        up[i] += step
        um[i] -= step
        out[m + i] = (
            r.discrete_energy(f, (xi, up), exact, rule)
            - r.discrete_energy(f, (xi, um), exact, rule)
        ) / (2 * step)
    return out


def random_feasible_state(rng, f, n, exact, rule, xi_scale=0.1, u_scale=0.3):
    """Perturbation of the uniform-mesh Galerkin state with valid spacing."""
    base = r.uniform_init(f, n, exact, rule)
    h = 1.0 / n
    while True:
        xi = np.sort(base.xi + rng.normal(scale=xi_scale * h, size=n - 1))
        nodes = np.concatenate(([exact.a], xi, [exact.b]))
        if np.min(np.diff(nodes)) > 1e-3 * h:
            break
    uvals = base.uvals + rng.normal(
        scale=u_scale * max(1e-2, np.max(np.abs(base.uvals))), size=n - 1
    )
    return xi, uvals
