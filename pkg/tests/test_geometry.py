import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from vptz.geometry import (
    BehindCamera,
    CameraIntrinsics,
    Direction,
    ImagePoint,
    ZeroVector,
    direction_from_point,
    project_camera_point,
    project_world_point,
    project_world_points,
    unproject_image_point,
    unproject_image_points,
    view_matrices,
    view_matrix,
    wrap_angle,
)

import oracles

SQUARE_90 = CameraIntrinsics(math.pi / 2, 480, 480)

thetas = st.floats(0.05, math.pi - 0.05)
phis = st.floats(-math.pi, math.pi)
directions = st.builds(Direction, thetas, phis)
intrinsics = st.builds(
    CameraIntrinsics,
    st.floats(math.radians(5), math.radians(120)),
    st.integers(16, 1920),
    st.integers(16, 1080),
)


@pytest.mark.parametrize(
    "p, expected",
    [
        ((1, 0, 0), (math.pi / 2, 0.0)),
        ((0, 0, 1), (0.0, 0.0)),
        ((1, 1, 0), (math.pi / 2, math.pi / 4)),
        ((-1, 0, 0), (math.pi / 2, math.pi)),
        ((0, 0, -3), (math.pi, 0.0)),
    ],
)
def test_direction_from_point(p, expected):
    d = direction_from_point(p)
    assert d.theta == pytest.approx(expected[0], abs=1e-15)
    assert d.phi == pytest.approx(expected[1], abs=1e-15)


def test_direction_from_zero_vector():
    with pytest.raises(ZeroVector):
        direction_from_point((0, 0, 0))


@given(st.tuples(*[st.floats(-10, 10)] * 3).filter(lambda p: np.linalg.norm(p) > 1e-3))
def test_direction_scale_invariant(p):
    ref = direction_from_point(p)
    for k in (1e-3, 1.0, 1e3):
        d = direction_from_point(np.asarray(p) * k)
        assert d.theta == pytest.approx(ref.theta, abs=1e-12)
        assert abs(wrap_angle(d.phi - ref.phi)) < 1e-12


@given(directions)
def test_unit_vector_norm(d):
    assert abs(np.linalg.norm(d.unit_vector()) - 1.0) < 1e-12


def test_normalized_folds_over_pole():
    d = Direction(math.pi + 0.2, 0.3).normalized()
    assert d.theta == pytest.approx(math.pi - 0.2)
    assert d.phi == pytest.approx(0.3 - math.pi)
    assert Direction(1.0, 3 * math.pi).normalized().phi == pytest.approx(math.pi)


def test_view_matrix_examples():
    m = view_matrix(Direction(math.pi / 2, 0.0))
    np.testing.assert_allclose(m @ [1, 0, 0], [0, 0, -1], atol=1e-15)
    np.testing.assert_allclose(m @ [1, 0, 1], [0, 1, -1], atol=1e-15)


@given(directions)
def test_view_matrix_matches_euler_oracle(d):
    ref = Rotation.from_euler("x", d.theta - math.pi).as_matrix() @ Rotation.from_euler(
        "z", math.pi / 2 - d.phi
    ).as_matrix()
    np.testing.assert_allclose(view_matrix(d), ref, atol=1e-12)


@given(directions)
def test_view_matrix_is_rotation(d):
    m = view_matrix(d)
    np.testing.assert_allclose(m @ m.T, np.eye(3), atol=1e-9)
    assert abs(np.linalg.det(m) - 1.0) < 1e-9


@given(directions)
def test_axis_maps_to_minus_z(d):
    cam = view_matrix(d) @ d.unit_vector()
    np.testing.assert_allclose(cam, [0, 0, -1], atol=1e-12)


def test_project_camera_point_examples():
    intr = CameraIntrinsics(math.radians(70), 640, 480)
    assert project_camera_point((0, 0, -5), intr) == pytest.approx((320, 240))
    # 45 deg elevation against a 45 deg half-FOV lands on the top edge (sympy-evaluated)
    assert project_camera_point((0, 1, -1), SQUARE_90) == pytest.approx((240, 480))
    with pytest.raises(BehindCamera):
        project_camera_point((0, 0, 1), SQUARE_90)
    with pytest.raises(BehindCamera):
        project_camera_point((0, 0, 0), SQUARE_90)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 10), intrinsics)
def test_projection_independent_of_near(x, y, depth, intr):
    a = project_camera_point((x, y, -depth), intr)
    b = project_camera_point((x, y, -depth), CameraIntrinsics(intr.vfov, intr.width, intr.height, near=0.01))
    assert a == pytest.approx(b, abs=1e-9)


def test_up_vector_convention():
    p = project_camera_point((0, 0.3, -1), SQUARE_90)
    assert p.u == pytest.approx(240) and p.v > 240


def test_project_world_point_examples():
    pose = Direction(math.pi / 2, 0.0)
    assert project_world_point((1, 0, 0), pose, SQUARE_90) == pytest.approx((240, 240))
    assert project_world_point((1, 0, 1), pose, SQUARE_90) == pytest.approx((240, 480))


def test_target_right_of_axis():
    # 10 deg to the right (decreasing pan) of a camera with a 90 deg horizontal FOV
    intr = CameraIntrinsics(2 * math.atan(0.75), 640, 480)
    t = Direction(math.pi / 2, -math.radians(10)).unit_vector()
    p = project_world_point(t, Direction(math.pi / 2, 0.0), intr)
    assert p.u == pytest.approx(376.42463382670877, abs=1e-9)
    assert p.v == pytest.approx(240.0, abs=1e-9)


def test_axis_projects_to_center_random():
    rng = np.random.default_rng(7)
    intr = CameraIntrinsics(math.radians(60), 640, 480)
    for _ in range(1000):
        d = Direction(rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi))
        p = project_world_point(d.unit_vector() * rng.uniform(0.1, 10), d, intr)
        assert abs(p.u - 320) < 1e-9 and abs(p.v - 240) < 1e-9


@given(directions, intrinsics, st.floats(0, 1), st.floats(0, 1))
def test_projection_matches_basis_oracle(d, intr, fu, fv):
    t = oracles.unproject(fu * intr.width, fv * intr.height, d.theta, d.phi, intr.vfov, intr.width, intr.height)
    got = project_world_point(t, d, intr)
    ref = oracles.project(t, d.theta, d.phi, intr.vfov, intr.width, intr.height)
    assert got == pytest.approx(ref, abs=1e-7)


def test_unproject_examples():
    pose = Direction(1.1, -2.0)
    intr = CameraIntrinsics(math.radians(50), 800, 600)
    d = unproject_image_point(intr.center, pose, intr)
    assert d.theta == pytest.approx(pose.theta, abs=1e-12)
    assert d.phi == pytest.approx(pose.phi, abs=1e-12)

    d = unproject_image_point(ImagePoint(240, 480), Direction(math.pi / 2, 0.0), SQUARE_90)
    assert d.theta == pytest.approx(math.pi / 4, abs=1e-12)
    assert d.phi == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=300)
@given(directions, intrinsics, st.floats(-0.2, 1.2), st.floats(-0.2, 1.2))
def test_round_trip_pixel(d, intr, fu, fv):
    u, v = fu * intr.width, fv * intr.height
    back = project_world_point(unproject_image_point(ImagePoint(u, v), d, intr).unit_vector(), d, intr)
    assert back == pytest.approx((u, v), abs=1e-6)


def test_unproject_collinear_with_target():
    rng = np.random.default_rng(11)
    intr = CameraIntrinsics(math.radians(90), 640, 480)
    for _ in range(10_000):
        pose = Direction(rng.uniform(0.1, math.pi - 0.1), rng.uniform(-math.pi, math.pi))
        t = oracles.unproject(rng.uniform(0, 640), rng.uniform(0, 480), pose.theta, pose.phi, intr.vfov, 640, 480)
        t = t * rng.uniform(0.5, 5.0)
        back = unproject_image_point(project_world_point(t, pose, intr), pose, intr).unit_vector()
        assert np.linalg.norm(np.cross(back, t / np.linalg.norm(t))) < 1e-9
        assert np.dot(back, t) > 0


def test_intrinsics_validation():
    with pytest.raises(ValueError):
        CameraIntrinsics(0.0, 10, 10)
    with pytest.raises(ValueError):
        CameraIntrinsics(math.pi, 10, 10)
    with pytest.raises(ValueError):
        CameraIntrinsics(1.0, 0, 10)
    intr = CameraIntrinsics.from_degrees(90, 640, 480)
    assert intr.aspect == pytest.approx(4 / 3)
    assert intr.focal_px == pytest.approx(240)
    assert intr.contains(ImagePoint(0, 0)) and not intr.contains(ImagePoint(640, 10))


def test_batched_pipelines_match_scalar():
    rng = np.random.default_rng(21)
    n = 200
    th, ph = rng.uniform(0.05, math.pi - 0.05, n), rng.uniform(-math.pi, math.pi, n)
    vfov = np.radians(rng.uniform(5, 120, n))
    w, h = rng.integers(16, 1921, n), rng.integers(16, 1081, n)
    u0, v0 = rng.uniform(0, 1, n) * w, rng.uniform(0, 1, n) * h
    rays = unproject_image_points(u0, v0, th, ph, vfov, w, h)
    u, v, in_front = project_world_points(rays * 4.0, th, ph, vfov, w, h)
    assert in_front.all()
    mats = view_matrices(th, ph)
    for i in range(n):
        d, intr = Direction(th[i], ph[i]), CameraIntrinsics(vfov[i], int(w[i]), int(h[i]))
        np.testing.assert_array_equal(mats[i], view_matrix(d))
        ref = unproject_image_point(ImagePoint(u0[i], v0[i]), d, intr).unit_vector()
        np.testing.assert_allclose(rays[i], ref, atol=1e-12)
        assert (u[i], v[i]) == pytest.approx((u0[i], v0[i]), abs=1e-7)


def test_batched_projection_flags_points_behind():
    d = Direction(math.pi / 2, 0.0)
    u, v, in_front = project_world_points(np.array([[1.0, 0, 0], [-1.0, 0, 0]]), d.theta, d.phi, 1.0, 64, 48)
    assert list(in_front) == [True, False] and math.isnan(u[1])
