from __future__ import annotations

import numpy as np
import pytest

from rmkit.errors import DimensionMismatch, NearParallel
from rmkit.frames import DepthMode
from rmkit.geometry.calibration import SensorType
from rmkit.geometry.camera import CameraModel
from rmkit.geometry.transforms import RigidTransform, random_rigid
from rmkit.reconstruction import FrameTag, PointCloud, Ray, pixel_ray, transform_cloud, triangulate_midpoint, unproject_depth
from rmkit.reconstruction.pipeline import long_throw_range
from rmkit.simulator.render import render_depth
from rmkit.simulator.scene import Plane, Scene


def test_principal_pixel_unprojects_on_axis():
    cam = CameraModel.pinhole(4, 4, 10.0, 10.0, 2.5, 2.5)  # pixel (2, 2) center sits on the axis
    depth = np.zeros((4, 4))
    valid = np.zeros((4, 4), bool)
    depth[2, 2], valid[2, 2] = 1.0, True
    pc = unproject_depth(depth, valid, cam)
    assert len(pc) == 1 and np.allclose(pc.points[0], [0, 0, 1], atol=1e-15)
    assert pc.frame is FrameTag.CAMERA


def test_all_invalid_is_empty(default_rig):
    cam = default_rig.camera(SensorType.DEPTH_LONG_THROW)
    pc = unproject_depth(np.ones((288, 320)), np.zeros((288, 320), bool), cam)
    assert len(pc) == 0


def test_dimension_mismatch(default_rig):
    cam = default_rig.camera(SensorType.DEPTH_LONG_THROW)
    with pytest.raises(DimensionMismatch):
        unproject_depth(np.ones((512, 512)), np.ones((512, 512), bool), cam)


def test_points_are_radial(default_rig):
    cam = default_rig.camera(SensorType.DEPTH_LONG_THROW)
    d = np.full((288, 320), 1.7)
    pc = unproject_depth(d, np.ones_like(d, bool), cam)
    assert np.allclose(np.linalg.norm(pc.points, axis=1), 1.7, atol=1e-12)


def test_simulated_frontal_plane_fits(default_rig):
    cam = default_rig.camera(SensorType.DEPTH_LONG_THROW)
    scene = Scene([Plane([0.0, 0.0, 2.0], [0.0, 0.0, -1.0])])
    pkt = render_depth(scene, cam, RigidTransform.identity(), DepthMode.LONG_THROW)
    d, valid = long_throw_range(pkt)
    assert valid.all()
    pc = unproject_depth(d, valid, cam)
    assert np.max(np.abs(pc.points[:, 2] - 2.0)) < 2e-3


def test_transform_cloud_properties(rng):
    pts = rng.normal(size=(100, 3))
    pc = PointCloud(pts, rng.uniform(size=100))
    same = transform_cloud(pc, RigidTransform.identity(), FrameTag.RIG)
    assert np.array_equal(same.points, pc.points) and same.frame is FrameTag.RIG
    shift = np.array([1.0, -2.0, 0.5])
    moved = transform_cloud(pc, RigidTransform.from_translation(shift), FrameTag.WORLD)
    assert np.allclose(moved.points.mean(0), pc.points.mean(0) + shift, atol=1e-14)
    T = random_rigid(rng, 4.0)
    back = transform_cloud(transform_cloud(pc, T, FrameTag.WORLD), T.inverse(), FrameTag.CAMERA)
    assert np.max(np.abs(back.points - pc.points)) < 1e-12
    assert np.array_equal(back.intensity, pc.intensity)


def test_cloud_validation():
    with pytest.raises(ValueError):
        PointCloud([[0.0, np.nan, 1.0]])
    with pytest.raises(ValueError):
        PointCloud(np.zeros((3, 3)), np.zeros(2))


def test_unproject_project_consistency(default_rig):
    for s in (SensorType.DEPTH_LONG_THROW, SensorType.LEFT_FRONT, SensorType.DEPTH_AHAT):
        cam = default_rig.camera(s)
        rng = np.random.default_rng(int(s))
        d = rng.uniform(0.3, 5.0, (cam.height, cam.width))
        pc = unproject_depth(d, np.ones_like(d, bool), cam)
        uv, ok = cam.project_points(pc.points)
        uu, vv = np.meshgrid(np.arange(cam.width) + 0.5, np.arange(cam.height) + 0.5)
        assert ok.all()
        assert np.max(np.abs(uv - np.column_stack([uu.ravel(), vv.ravel()]))) < 1e-3


# -- triangulation -------------------------------------------------------------


def test_exact_intersection():
    a = Ray([0, 0, 0], [0, 0, 1])
    b = Ray([1, 0, 0], np.array([-1, 0, 1]) / np.sqrt(2))
    p, gap = triangulate_midpoint(a, b)
    assert np.allclose(p, [0, 0, 1], atol=1e-15) and gap < 1e-15


def test_parallel_rays():
    with pytest.raises(NearParallel):
        triangulate_midpoint(Ray([0, 0, 0], [0, 0, 1]), Ray([1, 0, 0], [0, 0, 1]))


def test_skew_lines_gap():
    a = Ray([0, 0, 0], [1, 0, 0])
    b = Ray([0, 0, 1], [0, 1, 0])
    p, gap = triangulate_midpoint(a, b)
    assert np.allclose(p, [0, 0, 0.5]) and gap == pytest.approx(1.0)


def test_ray_frames_must_agree():
    with pytest.raises(ValueError):
        triangulate_midpoint(Ray([0, 0, 0], [0, 0, 1], FrameTag.RIG), Ray([1, 0, 0], [-1, 0, 1], FrameTag.WORLD))


def test_ray_direction_normalized():
    r = Ray([0, 0, 0], [3.0, 4.0, 0.0])
    assert abs(np.linalg.norm(r.direction) - 1.0) < 1e-15


def test_symmetry(rng):
    for _ in range(200):
        a = Ray(rng.normal(size=3), rng.normal(size=3))
        b = Ray(rng.normal(size=3), rng.normal(size=3))
        p1, g1 = triangulate_midpoint(a, b)
        p2, g2 = triangulate_midpoint(b, a)
        assert np.max(np.abs(p1 - p2)) < 1e-12 and abs(g1 - g2) < 1e-12


def test_simulated_marker_two_frontal_cameras(default_rig):
    marker = np.array([0.05, -0.03, 1.0])  # rig frame, about 1 m ahead
    rays = []
    for s in (SensorType.LEFT_FRONT, SensorType.RIGHT_FRONT):
        cam = default_rig.camera(s)
        cam_from_rig = default_rig[s].rig_from_sensor.inverse()
        uv, ok = cam.project_points(cam_from_rig.apply(marker))
        assert ok
        rays.append(pixel_ray(default_rig, s, uv))
    p, gap = triangulate_midpoint(*rays)
    assert np.linalg.norm(p - marker) < 1e-3
    assert gap < 1e-4
