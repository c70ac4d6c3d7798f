import numpy as np
import pytest

from jolopt.data import generate_opf_synthetic
from jolopt.errors import (DimMismatch, InfeasibleRegion, InstanceInvalid,
                           WeightsInvalid)
from jolopt.geometry import contains
from jolopt.opf import (OpfInstance, build_opf_problem, cost_objective,
                        penetration_objective, predict_solar,
                        scalarized_objective, solar_curvature, solar_loss,
                        solar_loss_gradient)
from jolopt.schedules import validate_schedule
from jolopt.solver import SolverConfig, run_joint

from oracles import central_diff, ridge_affine_fit


def tiny_instance(t=4, n2=2, f=3, seed=0, delta=0.5):
    rng = np.random.default_rng(seed)
    features = rng.normal(size=(t, f))
    solar = np.maximum(features @ np.full(f, 0.3) + 2.0, 0.0)
    return OpfInstance(
        caps=np.full((n2, t), 10.0),
        demand=np.full(t, 8.0),
        features=features,
        solar_true=solar,
        ramp_delta=delta)


def test_cost_examples():
    inst = tiny_instance(t=3, n2=1)
    inst.a1, inst.a2 = 1.0, 1e-12
    assert cost_objective(inst, np.array([[1.0, 2.0, 3.0]])) == pytest.approx(6.0, abs=1e-9)
    inst2 = tiny_instance(t=1, n2=2)
    inst2.a1, inst2.a2 = 1e-12, 1.0
    assert cost_objective(inst2, np.array([[2.0], [3.0]])) == pytest.approx(13.0, abs=1e-9)
    inst3 = tiny_instance(t=2, n2=2)
    assert cost_objective(inst3, np.zeros((2, 2))) == 0.0


def test_penetration_examples():
    inst = tiny_instance(t=2, n2=1, f=1)
    inst.features = np.array([[1.0], [1.0]])
    theta = np.array([5.0, 0.0])  # predictions 5 + 5 = 10
    x = np.array([[2.0, 3.0]])
    assert penetration_objective(inst, theta, x) == pytest.approx(2.0)
    assert penetration_objective(inst, np.zeros(2), x) == 0.0
    inst.eps_den = 1e-6
    assert penetration_objective(inst, np.array([0.1, 0.0]), np.zeros((1, 2))) \
        == pytest.approx(0.2 / 1e-6)


def test_negative_predictions_clamped():
    inst = tiny_instance(t=3, n2=1, f=1)
    inst.features = np.array([[1.0], [-1.0], [2.0]])
    pred = predict_solar(inst, np.array([1.0, 0.0]))
    assert np.allclose(pred, [1.0, 0.0, 2.0])


def test_scalarized_weight_edges_and_gradient():
    inst = tiny_instance()
    theta = np.append(np.full(inst.n_features, 0.3), 2.0)
    x = np.full((2, 4), 3.0)
    v_cost, g_cost = scalarized_objective(inst, theta, x, 1.0, 0.0)
    assert v_cost == pytest.approx(cost_objective(inst, x))
    assert np.allclose(g_cost, inst.a1 + 2 * inst.a2 * x)

    v_pen, g_pen = scalarized_objective(inst, theta, x, 0.0, 1.0)
    assert v_pen == pytest.approx(-penetration_objective(inst, theta, x))
    numer = predict_solar(inst, theta).sum()
    assert np.allclose(g_pen, numer / x.sum() ** 2)
    assert np.all(g_pen > 0)  # raising fossil dispatch always worsens f2

    with pytest.raises(WeightsInvalid):
        scalarized_objective(inst, theta, x, 0.7, 0.7)


def test_scalarized_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    inst = tiny_instance()
    theta = rng.normal(size=inst.n_features + 1)
    for w1 in (0.2, 0.5, 0.9):
        x = rng.uniform(1.0, 6.0, size=(2, 4))
        _, grad = scalarized_objective(inst, theta, x, w1, 1 - w1)
        fd = central_diff(
            lambda v: scalarized_objective(inst, theta, v.reshape(2, 4),
                                           w1, 1 - w1)[0],
            x.ravel()).reshape(2, 4)
        assert np.linalg.norm(grad - fd) <= 1e-5 * np.linalg.norm(fd)


def test_solar_loss_examples():
    inst = tiny_instance(f=2)
    theta_true = np.array([0.5, -0.2, 1.0])
    inst.solar_true = inst.features @ theta_true[:-1] + theta_true[-1]
    assert solar_loss(inst, theta_true) == pytest.approx(0.0, abs=1e-20)

    ones = tiny_instance(f=2)
    ones.solar_true = np.ones(ones.n_steps)
    assert solar_loss(ones, np.zeros(3)) == pytest.approx(1.0)

    fit = ridge_affine_fit(inst.features, inst.solar_true, ridge=0.0)
    assert np.max(np.abs(solar_loss_gradient(inst, fit))) < 1e-10


def test_solar_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    inst = tiny_instance(t=12, f=4)
    theta = rng.normal(size=5)
    g = solar_loss_gradient(inst, theta, ridge=0.01)
    fd = central_diff(lambda v: solar_loss(inst, v, ridge=0.01), theta)
    assert np.linalg.norm(g - fd) <= 1e-5 * np.linalg.norm(fd)


def test_curvature_bounds():
    inst = tiny_instance(t=50, f=5)
    mu, L = solar_curvature(inst, ridge=0.25)
    assert mu >= 2 * 0.25
    assert L >= mu


def test_build_dimensions_and_regions():
    instance, _ = generate_opf_synthetic(t_steps=96, n_generators=3,
                                         n_features=23, seed=1)
    problem = build_opf_problem(instance, 0.5, 0.5)
    assert problem.outer_dim == 288
    assert problem.inner_dim == 24
    # T balance rows + 2 * N2 * (T-1) ramp rows
    assert problem.region_x.n_halfspaces == 96 + 2 * 3 * 95

    single = OpfInstance(caps=np.array([[10.0]]), demand=np.array([5.0]),
                         features=np.zeros((1, 2)), solar_true=np.zeros(1))
    p1 = build_opf_problem(single, 1.0, 0.0)
    assert p1.region_x.n_halfspaces == 1  # just the balance row
    from jolopt.geometry import project
    z = project(p1.region_x, np.array([0.0]))
    assert z[0] == pytest.approx(5.0, abs=1e-7)  # region is {5 <= x <= 10}


def test_infeasible_demand_rejected():
    bad = OpfInstance(caps=np.array([[1.0, 1.0]]), demand=np.array([5.0, 0.5]),
                      features=np.zeros((2, 2)), solar_true=np.zeros(2))
    with pytest.raises(InfeasibleRegion):
        build_opf_problem(bad, 1.0, 0.0)


def test_region_refresh_follows_predictions():
    inst = tiny_instance(t=3, n2=1, f=1)
    inst.features = np.ones((3, 1))
    inst.demand = np.full(3, 6.0)
    problem = build_opf_problem(inst, 1.0, 0.0)
    region0 = problem.region_x
    # with zero predictions the balance floor is demand itself
    assert not contains(region0, np.full(3, 5.0), 1e-9)
    refreshed = problem.refresh_region_x(np.array([2.0, 0.0]))  # predicts 2
    assert contains(refreshed, np.full(3, 4.0), 1e-9)
    assert not contains(refreshed, np.full(3, 3.9), 1e-9)


def test_joint_run_respects_constraints_and_learns():
    instance, theta_true = generate_opf_synthetic(t_steps=24, n_generators=2,
                                                  n_features=4, seed=5)
    problem = build_opf_problem(instance, 0.5, 0.5, ridge=1e-6, noise="none")
    sched = validate_schedule(1.0, 1.0, 1, 0.6, 0.75)
    config = SolverConfig(schedule=sched, outer_steps=3, inner_steps=3,
                          max_global_iters=150, seed=0, record_every=1)
    trajectory = run_joint(problem, config)
    # each iteration's x was projected onto the region built from the theta
    # snapshot preceding it
    for prev, rec in zip(trajectory.records, trajectory.records[1:]):
        region = problem.refresh_region_x(prev.theta)
        assert contains(region, rec.x, 1e-7)
    fit = ridge_affine_fit(instance.features, instance.solar_true, ridge=1e-6)
    assert np.linalg.norm(trajectory.final_theta - fit) \
        < 0.05 * max(1.0, np.linalg.norm(fit))


def test_instance_validation():
    with pytest.raises(InstanceInvalid):
        OpfInstance(caps=np.ones((1, 3)), demand=np.ones(2),
                    features=np.zeros((3, 1)), solar_true=np.zeros(3))
    with pytest.raises(InstanceInvalid):
        OpfInstance(caps=-np.ones((1, 2)), demand=np.ones(2),
                    features=np.zeros((2, 1)), solar_true=np.zeros(2))
    inst = tiny_instance()
    with pytest.raises(DimMismatch):
        cost_objective(inst, np.zeros((3, 3)))
