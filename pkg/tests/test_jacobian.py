import math

import numpy as np
import pytest

from kinsa.jacobian import (
    GeometricJacobian,
    batch_determinants,
    determinant,
    finite_difference_jacobian,
    geometric_jacobian,
    manipulability,
    partition,
    rank,
)
from kinsa.kinematics import forward_kinematics
from kinsa.model import DhRow, RobotModel, builtin
from kinsa.singularity import refine

from .conftest import random_q

WAMS = ["wam6", "wam6-wrist", "wam6-code"]


def test_columns_follow_cross_product_rule(robot, rng):
    q = random_q(rng)
    chain = forward_kinematics(robot, q)
    J = geometric_jacobian(robot, q).matrix
    for i in range(robot.n):
        z, p = chain.axes[i], chain.origins[i]
        assert np.array_equal(J[:3, i], np.cross(z, chain.end_position - p))
        assert np.array_equal(J[3:, i], z)


@pytest.mark.parametrize("key", WAMS)
def test_wam_first_angular_column_is_base_axis(key, rng):
    for q in random_q(rng, 20):
        assert np.array_equal(geometric_jacobian(builtin(key), q).angular[:, 0], [0, 0, 1])


@pytest.mark.parametrize("key", WAMS)
def test_wam_entry_6_4(key, rng):
    for q in random_q(rng, 50):
        J = geometric_jacobian(builtin(key), q).matrix
        assert J[5, 3] == pytest.approx(math.cos(q[1] + q[2]), abs=1e-14)


def test_finite_difference_agreement(robot, rng):
    worst = 0.0
    for q in random_q(rng, 100):
        analytic = geometric_jacobian(robot, q).matrix
        worst = max(worst, np.abs(analytic - finite_difference_jacobian(robot, q, 1e-6)).max())
    assert worst <= 1e-6


def test_finite_difference_zero_column():
    # Joint 6 of the wrist-centered WAM sits on the end-effector origin: linear part is zero.
    model = builtin("wam6-wrist")
    q = np.radians([10, 20, 30, 40, 50, 60])
    assert np.allclose(geometric_jacobian(model, q).linear[:, 5], 0, atol=1e-15)
    assert np.linalg.norm(finite_difference_jacobian(model, q)[:3, 5]) <= 1e-6


def test_finite_difference_second_order(rng):
    model = builtin("our6")
    q = random_q(rng)
    analytic = geometric_jacobian(model, q).matrix
    err = [np.abs(finite_difference_jacobian(model, q, h) - analytic).max() for h in (1e-3, 5e-4)]
    assert err[1] < err[0]
    # central differences: halving h cuts the truncation error by ~4
    assert err[0] / err[1] == pytest.approx(4.0, rel=0.05)
    # below ~1e-5 rounding noise (~eps/h) matches the truncation error, so
    # only a bound is meaningful there
    err = [np.abs(finite_difference_jacobian(model, q, h) - analytic).max() for h in (1e-5, 5e-6)]
    assert max(err) <= 1e-9


def test_finite_difference_bad_step():
    with pytest.raises(ValueError):
        finite_difference_jacobian(builtin("our6"), np.zeros(6), 0.0)


def test_partition_reassembles(robot, rng):
    J = geometric_jacobian(robot, random_q(rng))
    blocks = partition(J)
    assert np.array_equal(blocks.assemble(), J.matrix)


def test_partition_rejects_non_square():
    model = RobotModel("three", (DhRow(1, 0, 0),) * 3)
    with pytest.raises(ValueError):
        partition(geometric_jacobian(model, np.zeros(3)))


@pytest.mark.parametrize("key", ["wam6-wrist", "wam6-code"])
def test_j12_vanishes_for_wrist_centered(key, rng):
    model = builtin(key)
    worst = max(np.abs(partition(geometric_jacobian(model, q)).j12).max() for q in random_q(rng, 1000))
    assert worst <= 1e-12


def test_j12_present_with_tool_offset(rng):
    J = geometric_jacobian(builtin("wam6"), random_q(rng))
    assert np.abs(partition(J).j12).max() > 1e-3


def test_determinant_diagonal():
    d = np.array([2.0, -3.0, 0.5, 4.0, 1.5, -1.0])
    assert determinant(np.diag(d)) == pytest.approx(np.prod(d), rel=1e-15)


def test_determinant_non_square():
    with pytest.raises(ValueError):
        determinant(np.zeros((6, 5)))


def test_manipulability_equals_abs_det(robot, rng):
    for q in random_q(rng, 50):
        J = geometric_jacobian(robot, q)
        assert manipulability(J) == pytest.approx(abs(determinant(J)), abs=1e-9)


def test_manipulability_non_square():
    model = RobotModel("three", (DhRow(1, 0, 0), DhRow(1, math.pi / 2, 0), DhRow(1, 0, 0)))
    J = geometric_jacobian(model, np.array([0.1, 0.2, 0.3]))
    assert manipulability(J) == pytest.approx(math.sqrt(np.linalg.det(J.matrix @ J.matrix.T)))


def test_rank_of_singular_configurations():
    model = builtin("wam6-code")
    raw = np.radians([0, 42, 325, 0, 90, 0])
    assert rank(geometric_jacobian(model, raw)) == 6
    assert rank(geometric_jacobian(model, raw), tol=1e-4) < 6
    root = refine(model, raw, 3, "j11")
    assert rank(geometric_jacobian(model, root.q)) < 6
    # wrist singularity
    assert rank(geometric_jacobian(model, np.radians([0, 30, 60, 0, 0, 0]))) == 5


def test_rank_generic_and_zero():
    assert rank(np.eye(6)) == 6
    assert rank(np.zeros((6, 6))) == 0


def test_geometric_jacobian_dimension_mismatch():
    with pytest.raises(ValueError):
        geometric_jacobian(builtin("our6"), [0.0] * 7)


def test_jacobian_keeps_q(rng):
    q = random_q(rng)
    J = geometric_jacobian(builtin("our6"), q)
    assert isinstance(J, GeometricJacobian)
    assert np.array_equal(J.q, q) and J.shape == (6, 6)


@pytest.mark.parametrize("key", ["wam6-wrist", "wam6-code"])
def test_block_determinant_product(key, rng):
    model = builtin(key)
    for q in random_q(rng, 200):
        J = geometric_jacobian(model, q).matrix
        d = np.linalg.det(J)
        assert abs(d - np.linalg.det(J[:3, :3]) * np.linalg.det(J[3:, 3:])) <= 1e-9 * abs(d) + 1e-15


def test_det_invariant_under_base_rotation(robot, rng):
    for q in random_q(rng, 50):
        ref = abs(np.linalg.det(geometric_jacobian(robot, q).matrix))
        for t1 in np.linspace(-math.pi, math.pi, 7):
            q2 = q.copy()
            q2[0] = t1
            assert abs(np.linalg.det(geometric_jacobian(robot, q2).matrix)) == pytest.approx(ref, abs=1e-9)


def test_our_det_ignores_last_joint(rng):
    model = builtin("our6")
    for q in random_q(rng, 100):
        ref = np.linalg.det(geometric_jacobian(model, q).matrix)
        q2 = q.copy()
        q2[5] = rng.uniform(-math.pi, math.pi)
        assert abs(np.linalg.det(geometric_jacobian(model, q2).matrix) - ref) <= 1e-12


def test_wam_det11_depends_only_on_shoulder_elbow(rng):
    model = builtin("wam6-wrist")
    for q in random_q(rng, 100):
        ref = np.linalg.det(geometric_jacobian(model, q).matrix[:3, :3])
        q2 = random_q(rng)
        q2[1:3] = q[1:3]
        assert abs(np.linalg.det(geometric_jacobian(model, q2).matrix[:3, :3]) - ref) <= 1e-12


def test_batch_determinants_matches_scalar(robot, rng):
    Q = random_q(rng, 64)
    for target, sl in (("full", np.s_[:, :]), ("j11", np.s_[:3, :3]), ("j22", np.s_[3:, 3:])):
        batch = batch_determinants(robot, Q, target)
        scalar = [np.linalg.det(geometric_jacobian(robot, q).matrix[sl]) for q in Q]
        assert np.allclose(batch, scalar, atol=1e-14, rtol=0)


def test_batch_determinants_bad_target():
    with pytest.raises(ValueError):
        batch_determinants(builtin("our6"), np.zeros((1, 6)), "j33")
