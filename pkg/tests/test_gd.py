import numpy as np
import pytest

import radapt1d as r
from radapt1d.errors import InfeasibleStateError, InvalidParameterError
from radapt1d.experiments import auto_eta
from radapt1d.gd import _energy_and_gradient

from conftest import fd_gradient, random_feasible_state


def test_discrete_energy_matches_renormalized_gap(f_x2, exact_x2, rule):
    state = r.amf_init(f_x2, 8, exact_x2, rule)
    direct = r.discrete_energy(f_x2, state, exact_x2, rule)
    assert state.energy == pytest.approx(direct, abs=1e-12)


def test_constant_forcing_energy_is_the_limit(f_const1, exact_const1):
    # nodal values of the reference on a uniform grid give exactly 1/24
    n = 8
    mesh = r.uniform_mesh(n, 0, 1)
    uvals = exact_const1.u(mesh.interior)
    val = r.discrete_energy(f_const1, (mesh.interior, uvals), exact_const1)
    assert val == pytest.approx(1 / 24, abs=1e-9)


def test_galerkin_values_minimize_the_value_block(f_x2, exact_x2):
    state = r.amf_init(f_x2, 8, exact_x2)
    rng = np.random.default_rng(2)
    for _ in range(20):
        perturbed = state.uvals + rng.normal(scale=1e-2, size=7)
        alt = r.discrete_energy(f_x2, (state.xi, perturbed), exact_x2)
        assert alt >= state.energy - 1e-12


def test_infeasible_states_are_rejected(f_x2, exact_x2):
    xi = np.array([0.5, 0.4, 0.8])
    with pytest.raises(InfeasibleStateError):
        r.discrete_energy(f_x2, (xi, np.zeros(3)), exact_x2)
    with pytest.raises(InfeasibleStateError):
        r.energy_gradient(f_x2, (xi, np.zeros(3)), exact_x2)
    with pytest.raises(InfeasibleStateError):
        r.make_state(f_x2, xi, np.zeros(3), exact_x2)


def test_state_validation(f_x2, exact_x2):
    with pytest.raises(InvalidParameterError):
        r.make_state(f_x2, np.array([0.3, 0.6]), np.array([1.0]), exact_x2)


def test_node_gradient_vanishes_for_uniform_constant_case(f_const1, exact_const1):
    n = 8
    mesh = r.uniform_mesh(n, 0, 1)
    uvals = exact_const1.u(mesh.interior)
    grad = r.energy_gradient(f_const1, (mesh.interior, uvals), exact_const1)
    assert np.max(np.abs(grad[: n - 1])) < 1e-10


@pytest.mark.parametrize("spec,n", [("poly:2", 4), ("poly:2", 8), ("gauss:0.5,0.1", 8)])
def test_gradient_matches_finite_differences(spec, n):
    f = r.parse_field_spec(spec)
    exact = r.solve_exact(f)
    rule = r.QuadratureRule(order=10)
    rng = np.random.default_rng(17)
    for _ in range(10):
        xi, uvals = random_feasible_state(rng, f, n, exact, rule)
        grad = r.energy_gradient(f, (xi, uvals), exact, rule)
        fd = fd_gradient(f, xi, uvals, exact, rule)
        err = np.max(np.abs(grad - fd)) / max(np.max(np.abs(fd)), 1e-10)
        assert err <= 1e-5


def test_stationary_start_terminates_immediately(f_const1, exact_const1):
    init = r.amf_init(f_const1, 8, exact_const1)
    state, trace = r.gd_run(f_const1, init, r.GdConfig(), exact_const1)
    assert state.converged
    assert state.iters <= 1
    assert state.energy == pytest.approx(1 / 24, abs=1e-9)


def test_descent_converges_at_small_n(f_x2, exact_x2):
    init = r.amf_init(f_x2, 4, exact_x2)
    cfg = r.GdConfig(eta=auto_eta(init.xi, 0, 1, 4), max_iter=50_000)
    state, trace = r.gd_run(f_x2, init, cfg, exact_x2)
    assert state.converged
    assert state.grad_norm1 < 1e-6
    # converged states are substationary in the nodal values
    res = r.residual(f_x2, state.mesh(0, 1), state.trial_function(0, 1))
    assert np.max(np.abs(res)) < 1e-6


def test_descent_improves_the_equidistributed_start(f_x2, exact_x2):
    init = r.amf_init(f_x2, 16, exact_x2)
    cfg = r.GdConfig(eta=auto_eta(init.xi, 0, 1, 16), max_iter=3000)
    state, trace = r.gd_run(f_x2, init, cfg, exact_x2)
    assert state.energy <= init.energy
    assert state.energy >= r.min_limit_energy(f_x2) - 1e-9
    energies = np.asarray(trace.energies)
    assert np.all(np.diff(energies) <= 1e-11)


def test_trace_matches_recomputed_energies(f_gauss01, exact_gauss01):
    init = r.amf_init(f_gauss01, 8, exact_gauss01)
    cfg = r.GdConfig(eta=auto_eta(init.xi, 0, 1, 8), max_iter=50)
    state, trace = r.gd_run(f_gauss01, init, cfg, exact_gauss01)
    assert trace.energies[0] == pytest.approx(init.energy, abs=1e-14)
    assert trace.energies[-1] == pytest.approx(state.energy, abs=1e-14)
    recomputed = r.discrete_energy(f_gauss01, state, exact_gauss01)
    assert state.energy == pytest.approx(recomputed, abs=1e-12)


def test_max_iter_flags_not_converged(f_x2, exact_x2):
    init = r.amf_init(f_x2, 16, exact_x2)
    state, trace = r.gd_run(f_x2, init, r.GdConfig(max_iter=5), exact_x2)
    assert state.status == "not_converged"
    assert not state.converged
    assert state.iters == 5


def test_infeasible_init_raises(f_x2, exact_x2):
    bad = r.OptimizationState(
        xi=np.array([0.6, 0.4]), uvals=np.zeros(2), energy=0.0, grad=np.zeros(4)
    )
    with pytest.raises(InfeasibleStateError):
        r.gd_run(f_x2, bad, r.GdConfig(), exact_x2)


def test_oversized_steps_are_backtracked(f_x2, exact_x2):
    init = r.amf_init(f_x2, 8, exact_x2)
    cfg = r.GdConfig(eta=1e3, max_iter=50)
    state, trace = r.gd_run(f_x2, init, cfg, exact_x2)
    energies = np.asarray(trace.energies)
    assert np.all(np.diff(energies) <= 1e-11)


def test_backtracking_off_raises_on_infeasible_step(f_x2, exact_x2):
    init = r.amf_init(f_x2, 8, exact_x2)
    cfg = r.GdConfig(eta=1e6, backtracking=False, max_iter=10)
    with pytest.raises(InfeasibleStateError):
        r.gd_run(f_x2, init, cfg, exact_x2)


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        r.GdConfig(eta=-1.0)
    with pytest.raises(InvalidParameterError):
        r.GdConfig(tol=0.0)


def test_trace_csv(tmp_path, f_x2, exact_x2):
    init = r.amf_init(f_x2, 4, exact_x2)
    _, trace = r.gd_run(f_x2, init, r.GdConfig(max_iter=10), exact_x2)
    path = tmp_path / "trace.csv"
    trace.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iter,energy,gradnorm"
    assert len(lines) == len(trace.iters) + 1
