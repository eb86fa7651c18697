import numpy as np
import pytest

from tlasso.links import LinkFunction, link_params
from tlasso.model import InstanceSpec, generate_instance
from tlasso.sets import ConstraintSet, contains
from tlasso.solver import (SolveOptions, joint_error, lipschitz_estimate, solve_tlasso)


def make_instance(n=16, m=48, s=3, k=2, amp=5.0, link="identity", seed=1):
    return generate_instance(InstanceSpec(n=n, m=m, s=s, k=k, corruption_amplitude=amp,
                                          link=LinkFunction(link), seed=seed))


def anchor_l1_sets(inst, mu=1.0, scale=1.0):
    rx = float(np.sum(np.abs(mu * inst.x_star))) * scale
    rv = float(np.sum(np.abs(inst.v_star)))
    set_x = ConstraintSet("l1_ball", radius=rx, dim=inst.n)
    if rv == 0.0:
        set_v = ConstraintSet("singleton", anchor=tuple(np.zeros(inst.m)))
    else:
        set_v = ConstraintSet("l1_ball", radius=rv * scale, dim=inst.m)
    return set_x, set_v


def test_unconstrained_least_squares():
    inst = make_instance(n=12, m=40, k=0)
    set_x = ConstraintSet("full_space", dim=inst.n)
    set_v = ConstraintSet("singleton", anchor=tuple(np.zeros(inst.m)))
    res = solve_tlasso(inst, set_x, set_v, SolveOptions(max_iters=50_000))
    ls, *_ = np.linalg.lstsq(inst.phi, inst.y, rcond=None)
    assert np.linalg.norm(res.x_hat - ls) / np.linalg.norm(ls) < 1e-8
    assert np.allclose(res.x_hat, inst.x_star, atol=1e-7)
    assert res.final_residual_norm < 1e-7


def test_zero_data_zero_solution():
    inst = make_instance(k=0)
    inst = type(inst)(phi=inst.phi, x_star=inst.x_star, v_star=inst.v_star,
                      y=np.zeros(inst.m), link=inst.link, seed=inst.seed)
    set_x = ConstraintSet("l2_ball", radius=1.0, dim=inst.n)
    set_v = ConstraintSet("l2_ball", radius=1.0, dim=inst.m)
    res = solve_tlasso(inst, set_x, set_v)
    assert np.allclose(res.x_hat, 0.0) and np.allclose(res.v_hat, 0.0)
    assert res.objective_trace[-1] == pytest.approx(0.0)


def test_feasibility_and_monotone_trace():
    inst = make_instance(link="sign", seed=4)
    set_x, set_v = anchor_l1_sets(inst, mu=link_params(inst.link).mu)
    res = solve_tlasso(inst, set_x, set_v)
    assert contains(set_x, res.x_hat, 1e-9)
    assert contains(set_v, res.v_hat, 1e-9)
    trace = np.array(res.objective_trace)
    assert np.all(np.diff(trace) <= 1e-10)


def test_joint_error_cases():
    inst = make_instance()
    params = link_params(inst.link)
    exact = type("R", (), {"x_hat": params.mu * inst.x_star, "v_hat": inst.v_star})
    assert joint_error(exact, inst, params) == 0.0
    zero = type("R", (), {"x_hat": np.zeros(inst.n), "v_hat": np.zeros(inst.m)})
    expect = np.sqrt(params.mu ** 2 + np.linalg.norm(inst.v_star) ** 2)
    assert joint_error(zero, inst, params) == pytest.approx(expect, abs=1e-12)
    bump = inst.x_star.copy()
    bump[0] += 1e-3
    off = type("R", (), {"x_hat": bump, "v_hat": inst.v_star})
    assert joint_error(off, inst, params) == pytest.approx(1e-3, rel=1e-9)


def test_lipschitz_degenerate_cases():
    inst = make_instance(n=4, m=4, k=0)
    degen = type(inst)(phi=np.zeros((4, 4)), x_star=inst.x_star, v_star=inst.v_star,
                       y=inst.y, link=inst.link, seed=0)
    assert lipschitz_estimate(degen, 50) == pytest.approx(4 * 1.01, rel=1e-6)
    one = type(inst)(phi=np.array([[2.0]]), x_star=np.ones(1), v_star=np.zeros(1),
                     y=np.ones(1), link=inst.link, seed=0)
    assert lipschitz_estimate(one, 50) == pytest.approx(5 * 1.01, rel=1e-6)


def test_lipschitz_against_eigendecomposition():
    inst = make_instance(n=32, m=64, seed=9)
    exact = np.linalg.eigvalsh(inst.phi @ inst.phi.T + inst.m * np.eye(inst.m))[-1]
    est = lipschitz_estimate(inst, 200)
    assert abs(est / 1.01 - exact) / exact < 0.02


def test_cvxpy_oracle_objective_agreement():
    cvxpy = pytest.importorskip("cvxpy")
    for seed in (0, 1, 2):
        inst = make_instance(n=10, m=18, s=2, k=2, seed=seed)
        set_x, set_v = anchor_l1_sets(inst)
        res = solve_tlasso(inst, set_x, set_v, SolveOptions(max_iters=200_000,
                                                            grad_map_tol=1e-11))
        x = cvxpy.Variable(inst.n)
        v = cvxpy.Variable(inst.m)
        obj = cvxpy.Minimize(cvxpy.norm(inst.y - inst.phi @ x - np.sqrt(inst.m) * v, 2))
        cons = [cvxpy.norm1(x) <= set_x.radius]
        if set_v.kind == "l1_ball":
            cons.append(cvxpy.norm1(v) <= set_v.radius)
        else:
            cons.append(v == 0)
        prob = cvxpy.Problem(obj, cons)
        prob.solve()
        assert abs(res.final_residual_norm - prob.value) < 1e-4


def test_variational_inequality_certificate():
    inst = make_instance(n=8, m=16, s=2, k=2, seed=5)
    set_x, set_v = anchor_l1_sets(inst)
    res = solve_tlasso(inst, set_x, set_v, SolveOptions(max_iters=200_000,
                                                        grad_map_tol=1e-11))
    r = inst.y - inst.phi @ res.x_hat - np.sqrt(inst.m) * res.v_hat
    gx, gv = -(inst.phi.T @ r), -np.sqrt(inst.m) * r
    gnorm = np.sqrt(np.linalg.norm(gx) ** 2 + np.linalg.norm(gv) ** 2)
    rng = np.random.default_rng(2)
    from tlasso.sets import project
    for _ in range(1000):
        u = project(set_x, rng.standard_normal(inst.n) * set_x.radius)
        w = project(set_v, rng.standard_normal(inst.m))
        inner = gx @ (u - res.x_hat) + gv @ (w - res.v_hat)
        assert inner >= -1e-6 * max(gnorm, 1.0)


def test_sign_link_direction_recovery():
    inst = make_instance(n=32, m=2048, s=3, k=0, link="sign", seed=6)
    params = link_params(inst.link)
    set_x, set_v = anchor_l1_sets(inst, mu=params.mu)
    res = solve_tlasso(inst, set_x, set_v)
    direction = res.x_hat / np.linalg.norm(res.x_hat)
    assert direction @ inst.x_star >= 0.99
