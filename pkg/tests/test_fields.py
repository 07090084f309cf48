import numpy as np
import pytest

import radapt1d as r
from radapt1d.errors import DerivativeFallbackWarning, InvalidParameterError


def test_gaussian_peak_value():
    f = r.gaussian(0.5, 0.05)
    # direct evaluation of the density formula
    expected_peak = 1.0 / (0.05 * np.sqrt(2.0 * np.pi))
    assert f(0.5) == pytest.approx(expected_peak, rel=1e-14)
    assert expected_peak == pytest.approx(7.978845608028654, rel=1e-14)


def test_gaussian_far_tail_is_effectively_zero():
    f = r.gaussian(0.5, 0.05)
    expected = 7.978845608028654 * np.exp(-0.25 / (2 * 0.05**2))
    assert f(0.0) == pytest.approx(expected, rel=1e-12)
    assert f(0.0) == pytest.approx(1.5389197253412948e-21, rel=1e-12)


def test_gaussian_deriv1_vanishes_at_center():
    f = r.gaussian(0.5, 0.05)
    assert f.deriv1(0.5) == 0.0


def test_gaussian_rejects_nonpositive_sigma():
    with pytest.raises(InvalidParameterError):
        r.gaussian(0.5, 0.0)
    with pytest.raises(InvalidParameterError):
        r.gaussian(0.5, -1.0)


def test_monomial_values_and_derivatives():
    assert r.monomial(2)(0.5) == 0.25
    assert r.monomial(0).deriv1(0.3) == 0.0
    assert r.monomial(5).deriv2(1.0) == 20.0
    assert r.monomial(1).deriv1(0.0) == 1.0


def test_monomial_rejects_negative_degree():
    with pytest.raises(InvalidParameterError):
        r.monomial(-1)


def test_root_field_basics():
    f = r.root(2)
    assert f(0.25) == 0.5
    # clamped derivative stays finite at the singular endpoint
    assert np.isfinite(f.deriv1(0.0))
    assert np.isfinite(f.deriv2(0.0))
    with pytest.raises(InvalidParameterError):
        r.root(1)


def test_constant_field():
    f = r.constant(3.5)
    x = np.linspace(0, 1, 7)
    assert np.all(f(x) == 3.5)
    assert np.all(f.deriv1(x) == 0.0)


_CATALOG = [
    r.constant(2.5),
    *[r.monomial(k) for k in range(6)],
    *[r.root(p) for p in range(2, 7)],
    r.gaussian(0.5, 0.05),
    r.gaussian(0.3, 0.2),
]


@pytest.mark.parametrize("f", _CATALOG, ids=lambda f: f.label)
def test_catalog_derivatives_match_finite_differences(f):
    a, b = f.domain
    h = 1e-5 * (b - a)
    # interior sample: central stencils need room, and root-type second
    # derivatives are unbounded approaching 0
    x = np.linspace(a + 0.01 * (b - a), b - 0.01 * (b - a), 100)
    fd1 = (f(x + h) - f(x - h)) / (2 * h)
    fd2 = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h)
    for fd, dv in ((fd1, f.deriv1(x)), (fd2, f.deriv2(x))):
        scale = np.max(np.abs(dv))
        assert np.max(np.abs(fd - dv)) <= max(1e-4 * scale, 1e-8)


def test_lagrangian_value_and_second_partials():
    f = r.monomial(2)
    L = r.DirichletLagrangian(f)
    x, z, p = 0.5, -2.0, 3.0
    assert L(x, z, p) == 0.5 * 9.0 + 0.25 * (-2.0)
    assert (L.d2_pp, L.d2_zz, L.d2_zp) == (1.0, 0.0, 0.0)


def test_parse_field_spec_round_trips():
    assert r.parse_field_spec("const:2").label == "const:2"
    assert r.parse_field_spec("poly:3").label == "poly:3"
    assert r.parse_field_spec("root:4").label == "root:4"
    f = r.parse_field_spec("gauss:0.5,0.05")
    assert f.label == "gauss:0.5,0.05"
    assert f(0.5) == pytest.approx(7.978845608028654, rel=1e-14)


@pytest.mark.parametrize(
    "spec", ["", "poly", "poly:x", "gauss:0.5", "root:2.5", "wiggle:3", "gauss:a,b"]
)
def test_parse_field_spec_rejects_malformed(spec):
    with pytest.raises(InvalidParameterError):
        r.parse_field_spec(spec)


def test_finite_difference_fallback_warns():
    f = r.ScalarField(fn=lambda x: x**3, label="bare cubic")
    with pytest.warns(DerivativeFallbackWarning):
        d = f.deriv1(0.5)
    assert d == pytest.approx(3 * 0.25, rel=1e-8)
    with pytest.warns(DerivativeFallbackWarning):
        d2 = f.deriv2(0.5)
    assert d2 == pytest.approx(3.0, rel=1e-4)
