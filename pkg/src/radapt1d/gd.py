"""Joint gradient descent on interior node positions and nodal values.

The variables are the ``n - 1`` interior nodes and the ``n - 1`` interior
nodal values of an n-cell trial function with zero boundary values; the
objective is the renormalized energy gap.  The descent is plain fixed-step
gradient descent with an optional safeguard: any step that produces an
infeasible mesh or increases the energy is retried with the step halved
(the step is restored at the next iteration).  Iteration stops when the
1-norm of the gradient drops below the tolerance.

The gradient is analytic.  The nodal-value block is the Galerkin residual;
the node block combines the jump of the squared slopes across each node
with the shape derivative of the per-cell forcing integrals:

    dE/dnode_i = n**2 * ( (s_i**2 - s_{i-1}**2) / 2
                          - s_{i-1} * int_{cell i-1} f * lam
                          - s_i * int_{cell i} f * (1 - lam) )

where ``s`` are cell slopes and ``lam`` the local cell coordinate.  The
moving-endpoint boundary terms cancel, so no derivative of f is required.
The full gradient agrees with central finite differences of the energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import exact_action, renormalized_gap
from .errors import InfeasibleStateError, InvalidParameterError
from .fem import element_hat_integrals, galerkin_solve
from .fields import DirichletLagrangian
from .mesh import MIN_CELL_FACTOR, Mesh, PiecewiseAffine, uniform_mesh
from .quadrature import DEFAULT_RULE, QuadratureRule

_ETA_FLOOR = 1e-18


@dataclass
class GdConfig:
    """Step size, stopping tolerance and iteration budget for the descent.

    ``eta=None`` selects the default ``0.1 / n**2``.
    """

    eta: float | None = None
    tol: float = 1e-6
    max_iter: int = 100_000
    backtracking: bool = True

    def __post_init__(self):
        if self.eta is not None and not self.eta > 0.0:
            raise InvalidParameterError(f"step size must be positive, got {self.eta}")
        if not self.tol > 0.0:
            raise InvalidParameterError(f"tolerance must be positive, got {self.tol}")
        if self.max_iter < 0:
            raise InvalidParameterError("max_iter must be nonnegative")


@dataclass
class OptimizationState:
    """Interior nodes and values with their energy and gradient.

    ``grad`` stacks the node block before the value block; ``status`` is one
    of ``initial / converged / not_converged / stalled``.
    """

    xi: np.ndarray
    uvals: np.ndarray
    energy: float
    grad: np.ndarray
    iters: int = 0
    status: str = "initial"

    @property
    def n(self):
        return self.xi.size + 1

    @property
    def converged(self):
        return self.status == "converged"

    @property
    def grad_norm1(self):
        return float(np.sum(np.abs(self.grad)))

    def mesh(self, a, b):
        return Mesh(np.concatenate(([a], self.xi, [b])))

    def trial_function(self, a, b):
        vals = np.concatenate(([0.0], self.uvals, [0.0]))
        return PiecewiseAffine(self.mesh(a, b), vals)


@dataclass
class GdTrace:
    iters: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)

    CSV_HEADER = "iter,energy,gradnorm"

    def append(self, k, energy, gnorm):
        self.iters.append(k)
        self.energies.append(energy)
        self.grad_norms.append(gnorm)

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.CSV_HEADER + "\n")
            for k, e, g in zip(self.iters, self.energies, self.grad_norms):
                fh.write(f"{k},{float(e)!r},{float(g)!r}\n")


def _as_variables(state):
    if isinstance(state, OptimizationState):
        return state.xi, state.uvals
    xi, uvals = state
    return np.asarray(xi, dtype=float), np.asarray(uvals, dtype=float)


def _feasible(xi, a, b):
    eps = MIN_CELL_FACTOR * (b - a)
    nodes = np.concatenate(([a], xi, [b]))
    return bool(np.all(np.diff(nodes) >= eps))


def _require_feasible(xi, a, b):
    if not _feasible(xi, a, b):
        raise InfeasibleStateError(
            "interior nodes must be strictly increasing inside the domain with "
            "at least the minimal cell spacing"
        )


def _energy_and_gradient(f, xi, uvals, a, b, n2, fstar, rule):
    """Fused energy/gradient evaluation sharing one quadrature pass.

    Also returns the rounding envelope of the energy value: the gap between
    the action and its reference is amplified by n**2, so energy differences
    below ``eps * n**2 * |action scale|`` are not representable.
    """
    nodes = np.concatenate(([a], xi, [b]))
    vals = np.concatenate(([0.0], uvals, [0.0]))
    h = np.diff(nodes)
    s = np.diff(vals) / h
    kinetic = 0.5 * float(np.sum(s * s * h))
    left, right = element_hat_integrals(f, nodes, rule)
    load = float(np.sum(left * vals[:-1] + right * vals[1:]))
    energy = n2 * (kinetic + load - fstar)
    noise = 64.0 * np.finfo(float).eps * n2 * (abs(kinetic) + abs(load) + abs(fstar))
    grad_xi = 0.5 * (s[1:] ** 2 - s[:-1] ** 2) - s[:-1] * right[:-1] - s[1:] * left[1:]
    grad_u = s[:-1] - s[1:] + right[:-1] + left[1:]
    return energy, n2 * np.concatenate((grad_xi, grad_u)), noise


def discrete_energy(f, state, exact, rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Renormalized gap of the trial function implied by the state."""
    xi, uvals = _as_variables(state)
    a, b = exact.a, exact.b
    _require_feasible(xi, a, b)
    n = xi.size + 1
    vals = np.concatenate(([0.0], uvals, [0.0]))
    u = PiecewiseAffine(Mesh(np.concatenate(([a], xi, [b]))), vals)
    report = renormalized_gap(DirichletLagrangian(f), u, exact, n, rule)
    return report.renormalized


def energy_gradient(f, state, exact, rule: QuadratureRule = DEFAULT_RULE):
    """Analytic gradient of the renormalized gap, node block then value block."""
    xi, uvals = _as_variables(state)
    a, b = exact.a, exact.b
    _require_feasible(xi, a, b)
    n = xi.size + 1
    fstar = exact_action(DirichletLagrangian(f), exact, rule)
    _, grad, _ = _energy_and_gradient(f, xi, uvals, a, b, float(n * n), fstar, rule)
    return grad


def make_state(f, xi, uvals, exact, rule: QuadratureRule = DEFAULT_RULE) -> OptimizationState:
    """Bundle variables with their energy and gradient (validates feasibility)."""
    xi = np.array(xi, dtype=float)
    uvals = np.array(uvals, dtype=float)
    if xi.shape != uvals.shape:
        raise InvalidParameterError("node and value blocks must have equal length")
    a, b = exact.a, exact.b
    _require_feasible(xi, a, b)
    n = xi.size + 1
    fstar = exact_action(DirichletLagrangian(f), exact, rule)
    energy, grad, _ = _energy_and_gradient(f, xi, uvals, a, b, float(n * n), fstar, rule)
    return OptimizationState(xi=xi, uvals=uvals, energy=energy, grad=grad)


def amf_init(f, n, exact, rule: QuadratureRule = DEFAULT_RULE, mmap=None) -> OptimizationState:
    """Equidistributed mesh plus Galerkin values: the standard starting point."""
    from .amf import amf_mesh, asymptotic_map

    if mmap is None:
        mmap = asymptotic_map(f, exact.a, exact.b, rule, n_hint=n)
    mesh = amf_mesh(mmap, n)
    u = galerkin_solve(f, mesh, rule)
    return make_state(f, mesh.interior, u.values[1:-1], exact, rule)


def uniform_init(f, n, exact, rule: QuadratureRule = DEFAULT_RULE) -> OptimizationState:
    mesh = uniform_mesh(n, exact.a, exact.b)
    u = galerkin_solve(f, mesh, rule)
    return make_state(f, mesh.interior, u.values[1:-1], exact, rule)


def gd_run(
    f,
    init: OptimizationState,
    cfg: GdConfig | None = None,
    exact=None,
    rule: QuadratureRule = DEFAULT_RULE,
):
    """Fixed-step descent from ``init``; returns (final state, trace).

    Terminates when the gradient 1-norm drops below ``cfg.tol``, when
    ``cfg.max_iter`` steps were taken (state flagged not converged) or when
    the safeguarded step underflows (flagged stalled).
    """
    if exact is None:
        raise InvalidParameterError("gd_run needs the reference solution")
    if cfg is None:
        cfg = GdConfig()
    a, b = exact.a, exact.b
    xi = init.xi.copy()
    uvals = init.uvals.copy()
    _require_feasible(xi, a, b)
    n = xi.size + 1
    n2 = float(n * n)
    eta0 = cfg.eta if cfg.eta is not None else 0.1 / n2
    fstar = exact_action(DirichletLagrangian(f), exact, rule)

    energy, grad, noise = _energy_and_gradient(f, xi, uvals, a, b, n2, fstar, rule)
    trace = GdTrace()
    gnorm = float(np.sum(np.abs(grad)))
    trace.append(0, energy, gnorm)

    k = 0
    status = "not_converged"
    m = xi.size
    while True:
        if gnorm < cfg.tol:
            status = "converged"
            break
        if k >= cfg.max_iter:
            status = "not_converged"
            break
        gx, gu = grad[:m], grad[m:]
        eta = eta0
        stalled = False
        while True:
            cand_xi = xi - eta * gx
            cand_u = uvals - eta * gu
            if _feasible(cand_xi, a, b):
                cand_energy, cand_grad, cand_noise = _energy_and_gradient(
                    f, cand_xi, cand_u, a, b, n2, fstar, rule
                )
                # an "increase" within the rounding envelope is not a real
                # ascent; rejecting it would stall the safeguard in halving
                # storms at the float noise floor
                if not cfg.backtracking or cand_energy <= energy + max(noise, cand_noise):
                    xi, uvals = cand_xi, cand_u
                    energy, grad, noise = cand_energy, cand_grad, cand_noise
                    break
            elif not cfg.backtracking:
                raise InfeasibleStateError(
                    "descent step left the feasible mesh set (backtracking disabled)"
                )
            eta *= 0.5
            if eta < _ETA_FLOOR:
                stalled = True
                break
        if stalled:
            status = "stalled"
            break
        k += 1
        gnorm = float(np.sum(np.abs(grad)))
        trace.append(k, energy, gnorm)

    final = OptimizationState(xi=xi, uvals=uvals, energy=energy, grad=grad, iters=k, status=status)
    return final, trace
