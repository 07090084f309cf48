"""Scalar fields on an interval, with derivatives, and the forcing catalog.

A :class:`ScalarField` wraps a vectorized callable together with optional
analytic first and second derivatives.  Operations that need a derivative
fall back to central finite differences (step ``1e-6 * (b - a)``) and emit a
:class:`~radapt1d.errors.DerivativeFallbackWarning` when they do.

The catalog provides the forcing terms used throughout the experiments:
constants, monomials ``x**k``, root functions ``x**(1/p)`` and normalized
Gaussian bumps.  Catalog fields are addressable by string spec
(``"const:c"``, ``"poly:k"``, ``"root:p"``, ``"gauss:mu,sigma"``).
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import DerivativeFallbackWarning, InvalidParameterError

# Derivatives of root fields blow up at 0; evaluation is clamped here.  Only
# integrable quantities of the field itself enter the algorithms downstream.
ROOT_CLAMP = 1e-14

_FD_STEP_FACTOR = 1e-6


class ScalarField:
    """A real-valued function on ``[a, b]`` with optional derivatives.

    Instances are immutable after construction and safe for concurrent reads.
    The wrapped callables must accept numpy arrays.
    """

    __slots__ = ("_fn", "_d1", "_d2", "label", "domain", "resolution_hint")

    def __init__(self, fn, d1=None, d2=None, label="", domain=(0.0, 1.0), resolution_hint=None):
        self._fn = fn
        self._d1 = d1
        self._d2 = d2
        self.label = label
        self.domain = (float(domain[0]), float(domain[1]))
        if not self.domain[0] < self.domain[1]:
            raise InvalidParameterError("field domain must satisfy a < b")
        # smallest feature length of the field, if far below the domain size;
        # quadrature rules subdivide cells that are wider than this
        self.resolution_hint = None if resolution_hint is None else float(resolution_hint)

    def __call__(self, x):
        return self._fn(np.asarray(x, dtype=float))

    @property
    def has_deriv1(self):
        return self._d1 is not None

    @property
    def has_deriv2(self):
        return self._d2 is not None

    def _fd_step(self):
        a, b = self.domain
        return _FD_STEP_FACTOR * (b - a)

    def deriv1(self, x):
        """First derivative; analytic if available, else central differences."""
        x = np.asarray(x, dtype=float)
        if self._d1 is not None:
            return self._d1(x)
        warnings.warn(
            f"field {self.label or '<anonymous>'}: first derivative by finite differences",
            DerivativeFallbackWarning,
            stacklevel=2,
        )
        h = self._fd_step()
        return (self._fn(x + h) - self._fn(x - h)) / (2.0 * h)

    def deriv2(self, x):
        """Second derivative; analytic if available, else central differences."""
        x = np.asarray(x, dtype=float)
        if self._d2 is not None:
            return self._d2(x)
        warnings.warn(
            f"field {self.label or '<anonymous>'}: second derivative by finite differences",
            DerivativeFallbackWarning,
            stacklevel=2,
        )
        h = self._fd_step()
        return (self._fn(x + h) - 2.0 * self._fn(x) + self._fn(x - h)) / (h * h)

    def __repr__(self):
        return f"ScalarField({self.label or '<anonymous>'!s}, domain={self.domain})"


class DirichletLagrangian:
    """The integrand ``L(x, z, p) = p**2 / 2 + f(x) * z``.

    Its second partials are constant: ``d2L/dp2 = 1``, ``d2L/dz2 = 0`` and
    ``d2L/dzdp = 0``; the limit-energy and second-variation evaluators rely
    on these values.
    """

    __slots__ = ("forcing",)

    d2_pp = 1.0
    d2_zz = 0.0
    d2_zp = 0.0

    def __init__(self, forcing: ScalarField):
        self.forcing = forcing

    def __call__(self, x, z, p):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.asarray(p) ** 2 + self.forcing(x) * np.asarray(z)

    def __repr__(self):
        return f"DirichletLagrangian(forcing={self.forcing.label!r})"


def constant(c, domain=(0.0, 1.0)):
    c = float(c)
    return ScalarField(
        fn=lambda x: np.full_like(x, c),
        d1=lambda x: np.zeros_like(x),
        d2=lambda x: np.zeros_like(x),
        label=f"const:{c:g}",
        domain=domain,
    )


def monomial(k, domain=(0.0, 1.0)):
    """The field ``x**k`` with analytic derivatives, for integer k >= 0."""
    k = int(k)
    if k < 0:
        raise InvalidParameterError(f"monomial degree must be >= 0, got {k}")

    def d1(x):
        if k == 0:
            return np.zeros_like(x)
        return k * x ** (k - 1)

    def d2(x):
        if k < 2:
            return np.zeros_like(x)
        return k * (k - 1) * x ** (k - 2)

    return ScalarField(fn=lambda x: x**k, d1=d1, d2=d2, label=f"poly:{k}", domain=domain)


def root(p, domain=(0.0, 1.0)):
    """The field ``x**(1/p)`` for integer p >= 2.

    Derivative evaluators clamp the argument to ``x >= ROOT_CLAMP`` since the
    derivatives are unbounded at 0.
    """
    p = int(p)
    if p < 2:
        raise InvalidParameterError(f"root order must be >= 2, got {p}")
    e = 1.0 / p

    def d1(x):
        xc = np.maximum(x, ROOT_CLAMP)
        return e * xc ** (e - 1.0)

    def d2(x):
        xc = np.maximum(x, ROOT_CLAMP)
        return e * (e - 1.0) * xc ** (e - 2.0)

    return ScalarField(fn=lambda x: x**e, d1=d1, d2=d2, label=f"root:{p}", domain=domain)


def gaussian(mu, sigma, domain=(0.0, 1.0)):
    """Normalized Gaussian density with peak ``1/(sigma*sqrt(2*pi))`` at mu."""
    mu = float(mu)
    sigma = float(sigma)
    if sigma <= 0.0:
        raise InvalidParameterError(f"gaussian sigma must be positive, got {sigma}")
    amp = 1.0 / (sigma * np.sqrt(2.0 * np.pi))
    inv2s2 = 1.0 / (2.0 * sigma * sigma)

    def fn(x):
        return amp * np.exp(-((x - mu) ** 2) * inv2s2)

    def d1(x):
        return fn(x) * (-(x - mu) * 2.0 * inv2s2)

    def d2(x):
        t = (x - mu) * 2.0 * inv2s2
        return fn(x) * (t * t - 2.0 * inv2s2)

    return ScalarField(
        fn=fn,
        d1=d1,
        d2=d2,
        label=f"gauss:{mu:g},{sigma:g}",
        domain=domain,
        resolution_hint=sigma,
    )


def parse_field_spec(spec, domain=(0.0, 1.0)):
    """Build a catalog field from its string spec.

    Grammar: ``const:c``, ``poly:k``, ``root:p``, ``gauss:mu,sigma``.
    """
    spec = spec.strip()
    kind, sep, args = spec.partition(":")
    if not sep:
        raise InvalidParameterError(f"malformed field spec {spec!r}; expected kind:args")
    try:
        if kind == "const":
            return constant(float(args), domain=domain)
        if kind == "poly":
            return monomial(int(args), domain=domain)
        if kind == "root":
            return root(int(args), domain=domain)
        if kind == "gauss":
            mu_s, sigma_s = args.split(",")
            return gaussian(float(mu_s), float(sigma_s), domain=domain)
    except InvalidParameterError:
        raise
    except ValueError as exc:
        raise InvalidParameterError(f"malformed field spec {spec!r}: {exc}") from exc
    raise InvalidParameterError(f"unknown field kind {kind!r} in spec {spec!r}")
