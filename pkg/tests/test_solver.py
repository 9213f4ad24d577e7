import numpy as np
import pytest

from conftest import gmrf_instance
from lapfit.closed_form import closed_form_weights
from lapfit.errors import NotConnected
from lapfit.graph import GraphTopology, WeightedLaplacian
from lapfit.objective import build_K, gradient_J, objective_J
from lapfit.solver import SolverConfig, projected_gradient, solve_cgl


def _kkt_violation(res, K, topo):
    """Largest violation of the optimality conditions at the reported point."""
    u = res.u_iterate
    g = gradient_J(WeightedLaplacian(topo, u), K)
    return np.max(np.abs(projected_gradient(u, g, SolverConfig().u_floor)))


@pytest.mark.parametrize("n, m, alpha", [(10, 20, 0.0), (16, 40, 0.05), (30, 45, 0.0), (8, 28, 0.2)])
def test_newton_reaches_kkt_point(rng, n, m, alpha):
    topo, _, x = gmrf_instance(n, m, 20 * n, rng)
    K = build_K(x, alpha)
    res = solve_cgl(K, topo)
    assert res.converged
    assert res.grad_inf_norm <= 1e-9
    assert np.all(res.u >= 0)
    assert _kkt_violation(res, K, topo) < 1e-8
    # objective decreased monotonically from the closed-form start
    J = np.array(res.history)
    assert np.all(np.diff(J) <= 1e-12)
    assert res.J <= objective_J(WeightedLaplacian(topo, closed_form_weights(x, topo, alpha)), K) + 1e-12


def test_gradient_method_agrees_with_newton(rng):
    topo, _, x = gmrf_instance(8, 12, 200, rng)
    K = build_K(x, 0.0)
    a = solve_cgl(K, topo)
    b = solve_cgl(K, topo, SolverConfig(method="gradient", grad_tol=1e-7))
    assert b.converged
    assert b.J == pytest.approx(a.J, abs=1e-8)
    np.testing.assert_allclose(b.u, a.u, atol=1e-4)


def test_optimum_is_not_worse_than_random_feasible_points(rng):
    topo, _, x = gmrf_instance(7, 12, 100, rng)
    K = build_K(x, 0.1)
    res = solve_cgl(K, topo)
    for _ in range(50):
        u = rng.uniform(0.01, 3.0, topo.m)
        assert objective_J(WeightedLaplacian(topo, u), K) >= res.J - 1e-10


def test_strong_penalty_zeroes_edges(rng):
    topo, _, x = gmrf_instance(10, 30, 200, rng)
    res = solve_cgl(build_K(x, 3.0), topo)
    assert res.converged
    assert np.all(res.u >= 0)
    weak = solve_cgl(build_K(x, 0.0), topo)
    assert res.u.sum() < weak.u.sum()


def test_disconnected_topology_rejected():
    with pytest.raises(NotConnected):
        solve_cgl(build_K(np.eye(4), 0.0), GraphTopology(4, [(0, 1), (2, 3)]))


def test_iteration_cap_reports_not_converged(rng):
    topo, _, x = gmrf_instance(12, 30, 100, rng)
    res = solve_cgl(build_K(x, 0.0), topo, SolverConfig(max_iters=1))
    assert not res.converged
    assert res.iterations <= 1


@pytest.mark.parametrize("bad", [dict(max_iters=-1), dict(grad_tol=0), dict(backtrack_factor=1.0), dict(method="lbfgs")])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        SolverConfig(**bad)


def test_projected_gradient_clips_at_floor():
    u = np.array([1.0, 0.0, 2.0])
    g = np.array([0.5, 1.0, -1.0])
    np.testing.assert_allclose(projected_gradient(u, g, 0.0), [0.5, 0.0, -1.0])


def test_random_tree_converges_to_closed_form(rng):
    topo, _, x = gmrf_instance(12, 11, 300, rng)
    res = solve_cgl(build_K(x, 0.0), topo, u0=np.full(11, 0.5))
    u_cf = closed_form_weights(x, topo, 0.0)
    assert np.linalg.norm(res.u - u_cf) / np.linalg.norm(u_cf) < 1e-6


def test_triangle_recovers_ground_truth():
    from lapfit.graph import assemble_laplacian
    from lapfit.gmrf import sample_gmrf

    topo = GraphTopology(3, [(0, 1), (0, 2), (1, 2)])
    u_true = np.array([1.0, 0.4, 0.7])
    x = sample_gmrf(assemble_laplacian(topo, u_true), 5000, 17)
    res = solve_cgl(build_K(x, 0.0), topo)
    assert np.linalg.norm(res.u - u_true) / np.linalg.norm(u_true) < 0.05


@pytest.mark.parametrize("method", ["newton", "gradient"])
def test_objective_non_increasing_from_constant_start(rng, method):
    topo, _, x = gmrf_instance(10, 25, 100, rng)
    res = solve_cgl(build_K(x, 0.0), topo, SolverConfig(method=method, max_iters=300), u0=np.full(25, 0.5))
    assert np.all(np.diff(res.history) <= 1e-12)
