import numpy as np
import pytest

import radapt1d as r
from radapt1d.amf import _snap_min_spacing
from radapt1d.errors import DegenerateDensityWarning, InvalidParameterError

from conftest import graded_mass


def test_constant_density_gives_identity_map(f_const1):
    m = r.asymptotic_map(f_const1)
    xs = np.linspace(0, 1, 17)
    assert np.max(np.abs(m(xs) - xs)) < 1e-13
    mesh = r.amf_mesh(m, 6)
    assert np.max(np.abs(mesh.nodes - r.uniform_mesh(6, 0, 1).nodes)) < 1e-12


def test_quadratic_forcing_map_closed_form(f_x2):
    # normalized cumulative of x**(4/3) is x**(7/3)
    m = r.asymptotic_map(f_x2)
    assert m(0.5) == pytest.approx(0.5 ** (7 / 3), abs=1e-10)
    xs = np.linspace(0, 1, 101)
    assert np.max(np.abs(m(xs) - xs ** (7 / 3))) < 1e-8


@pytest.mark.parametrize("n", [4, 16, 64])
def test_quadratic_forcing_nodes_closed_form(n, f_x2):
    mesh = r.amf_mesh(r.asymptotic_map(f_x2, n_hint=n), n)
    expected = (np.arange(n + 1) / n) ** (3 / 7)
    assert np.max(np.abs(mesh.nodes - expected)) <= 1e-8


def test_gaussian_nodes_symmetric(f_gauss005):
    mesh = r.amf_mesh(r.asymptotic_map(f_gauss005, n_hint=6), 6)
    assert np.max(np.abs(mesh.nodes + mesh.nodes[::-1] - 1.0)) <= 1e-9


def test_pseudo_inverse_round_trip(f_gauss005):
    m = r.asymptotic_map(f_gauss005)
    for t in (0.1, 0.25, 0.5, 0.77, 0.9):
        assert m(m.inverse(t)) == pytest.approx(t, abs=1e-10)


def test_inverse_rejects_levels_outside_unit_interval(f_const1):
    m = r.asymptotic_map(f_const1)
    with pytest.raises(InvalidParameterError):
        m.inverse(1.5)


@pytest.mark.parametrize("spec,n", [("poly:2", 16), ("gauss:0.5,0.05", 16), ("root:3", 8)])
def test_equidistribution(spec, n):
    f = r.parse_field_spec(spec)
    mesh = r.amf_mesh(r.asymptotic_map(f, n_hint=n), n)
    dens = lambda x: np.abs(f(x)) ** (2 / 3)
    total = graded_mass(dens, 0.0, 1.0)
    for a, b in zip(mesh.nodes[:-1], mesh.nodes[1:]):
        assert graded_mass(dens, a, b) == pytest.approx(total / n, rel=1e-8)


def test_refinement_nesting(f_x2, f_gauss005):
    for f in (f_x2, f_gauss005):
        m = r.asymptotic_map(f, n_hint=16)
        coarse = r.amf_mesh(m, 8)
        fine = r.amf_mesh(m, 16)
        assert np.max(np.abs(fine.nodes[::2] - coarse.nodes)) <= 1e-9


def test_nodes_shift_toward_larger_forcing():
    # f1 exceeds f2 on the left half; equal total (2/3)-mass by construction,
    # so the map of f1 rises faster there and its nodes move left
    alpha = (2.0 - 2.0 ** (2 / 3)) ** 1.5
    f1 = r.ScalarField(fn=lambda x: np.where(x <= 0.5, 2.0, alpha), label="left-heavy")
    f2 = r.constant(1.0)
    mass1 = r.integrate(lambda x: np.abs(f1(x)) ** (2 / 3), r.uniform_mesh(2, 0, 1))
    assert mass1 == pytest.approx(1.0, abs=1e-12)
    n = 8
    mesh1 = r.amf_mesh(r.asymptotic_map(f1, n_hint=n), n)
    mesh2 = r.amf_mesh(r.asymptotic_map(f2, n_hint=n), n)
    assert np.all(mesh1.interior <= mesh2.interior + 1e-12)
    assert np.any(mesh1.interior < mesh2.interior - 1e-3)


def test_plateau_targets_get_the_midpoint():
    f = r.ScalarField(fn=lambda x: np.where((x < 0.4) | (x > 0.6), 1.0, 0.0), label="gap")
    m = r.asymptotic_map(f, n_hint=8)
    mesh = r.amf_mesh(m, 2)
    # symmetric mass, so the plateau midpoint is exact
    assert mesh.nodes[1] == pytest.approx(0.5, abs=1e-9)
    mesh4 = r.amf_mesh(m, 4)
    assert np.allclose(mesh4.nodes, [0.0, 0.2, 0.5, 0.8, 1.0], atol=1e-3)


def test_vanishing_forcing_degenerates_to_uniform():
    f0 = r.constant(0.0)
    with pytest.warns(DegenerateDensityWarning):
        m = r.asymptotic_map(f0)
    assert m.degenerate
    with pytest.warns(DegenerateDensityWarning):
        mesh = r.amf_mesh(m, 5)
    assert np.allclose(mesh.nodes, r.uniform_mesh(5, 0, 1).nodes, atol=1e-12)


def test_snap_enforces_minimal_spacing():
    eps = 1e-3
    nodes = np.array([0.0, 0.5, 0.5 + 1e-7, 0.50001, 1.0])
    snapped, shift = _snap_min_spacing(nodes.copy(), eps)
    assert np.all(np.diff(snapped) >= eps * (1 - 1e-12))
    assert snapped[0] == 0.0 and snapped[-1] == 1.0
    assert shift > 0


def test_optimal_density_normalization(f_x2):
    density = r.optimal_density(f_x2)
    assert graded_mass(density, 0.0, 1.0) == pytest.approx(1.0, rel=1e-10)
    with pytest.raises(InvalidParameterError):
        r.optimal_density(r.constant(0.0))


def test_amf_mesh_rejects_bad_cell_count(f_x2):
    m = r.asymptotic_map(f_x2)
    with pytest.raises(InvalidParameterError):
        r.amf_mesh(m, 0)
