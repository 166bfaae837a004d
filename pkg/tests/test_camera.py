from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import fsolve

from rmkit.errors import BehindCamera, OutOfBounds, OutOfView
from rmkit.geometry.camera import (
    BrownConrady,
    CameraModel,
    map_camera_space_to_image_point,
    map_image_point_to_unit_plane,
)


@pytest.fixture(scope="module")
def pinhole():
    return CameraModel.pinhole(512, 512, 200.0, 200.0, 256.0, 256.0)


@pytest.fixture(scope="module")
def distorted():
    return CameraModel.from_parametric(320, 288, BrownConrady(200.0, 200.0, 160.0, 144.0, k1=-0.1))


def _grid16(cam):
    u = np.linspace(0.5, cam.width - 0.5, 16)
    v = np.linspace(0.5, cam.height - 0.5, 16)
    return np.stack(np.meshgrid(u, v), axis=-1).reshape(-1, 2)


def test_lut_shape_and_center(pinhole, distorted):
    for cam in (pinhole, distorted):
        assert cam.lut.shape == (cam.height, cam.width, 2)
        assert cam.lut.dtype == np.float32
        assert np.all(np.isfinite(cam.lut))
        assert np.linalg.norm(cam.lut[cam.height // 2, cam.width // 2]) < 1.0


def test_lut_matches_forward_model(distorted):
    # every table entry, run through the distortion polynomial, lands on its pixel center
    p = distorted.params
    x, y = distorted.lut[..., 0].astype(np.float64), distorted.lut[..., 1].astype(np.float64)
    u, v = p.to_pixel(*p.distort(x, y))
    uu, vv = np.meshgrid(np.arange(320) + 0.5, np.arange(288) + 0.5)
    xd, yd = p.from_pixel(u, v)
    xd0, yd0 = p.from_pixel(uu, vv)
    assert np.max(np.abs(xd - xd0)) < 1e-6
    assert np.max(np.abs(yd - yd0)) < 1e-6


def test_principal_point_maps_to_origin(pinhole):
    x, y = map_image_point_to_unit_plane(pinhole, (256.0, 256.0))
    assert abs(x) < 1e-12 and abs(y) < 1e-12


def test_pinhole_unit_plane_offset(pinhole):
    x, y = map_image_point_to_unit_plane(pinhole, (456.0, 256.0))
    assert x == pytest.approx(1.0, abs=1e-6)
    assert y == pytest.approx(0.0, abs=1e-7)


def test_distorted_round_trip_against_numeric_oracle(distorted):
    p = distorted.params
    # the oracle: pixel of (0.3, 0.2, 1) from a direct polynomial evaluation
    xd = 0.3 * (1 - 0.1 * 0.13)
    yd = 0.2 * (1 - 0.1 * 0.13)
    u, v = 200 * xd + 160, 200 * yd + 144
    x, y = map_image_point_to_unit_plane(distorted, (u, v))
    assert x == pytest.approx(0.3, abs=1e-6)
    assert y == pytest.approx(0.2, abs=1e-6)

    # independent inversion of the distortion polynomial with a generic root finder
    def resid(q):
        r2 = q[0] ** 2 + q[1] ** 2
        return [q[0] * (1 + p.k1 * r2) - xd, q[1] * (1 + p.k1 * r2) - yd]

    ref = fsolve(resid, [xd, yd], xtol=1e-14)
    assert np.allclose([x, y], ref, atol=1e-6)


def test_lut_against_fsolve_oracle_on_grid(distorted):
    p = distorted.params
    for i, j in [(0, 0), (319, 0), (100, 250), (160, 144), (319, 287), (30, 200)]:
        xd, yd = p.from_pixel(i + 0.5, j + 0.5)

        def resid(q):
            r2 = q[0] ** 2 + q[1] ** 2
            return [q[0] * (1 + p.k1 * r2) - xd, q[1] * (1 + p.k1 * r2) - yd]

        ref = fsolve(resid, [xd, yd], xtol=1e-14)
        assert np.allclose(distorted.lut[j, i], ref, atol=1e-6)


def test_out_of_bounds_pixel(pinhole):
    with pytest.raises(OutOfBounds):
        map_image_point_to_unit_plane(pinhole, (512.0, 10.0))
    with pytest.raises(OutOfBounds):
        map_image_point_to_unit_plane(pinhole, (-0.1, 10.0))


def test_project_optical_axis(pinhole, distorted):
    for cam, c in ((pinhole, (256.0, 256.0)), (distorted, (160.0, 144.0)), (distorted.with_lut_only(), (160.0, 144.0))):
        u, v = map_camera_space_to_image_point(cam, (0.0, 0.0, 2.0))
        assert u == pytest.approx(c[0], abs=1e-5)
        assert v == pytest.approx(c[1], abs=1e-5)


def test_projection_scale_invariant(distorted, rng):
    pts = np.column_stack([rng.uniform(-0.5, 0.5, (50, 2)), rng.uniform(0.5, 3.0, 50)])
    uv1, _ = distorted.project_points(pts)
    uv2, _ = distorted.project_points(2.0 * pts)
    assert np.max(np.abs(uv1 - uv2)) < 1e-9


def test_projection_errors(pinhole):
    with pytest.raises(BehindCamera):
        map_camera_space_to_image_point(pinhole, (0.0, 0.0, 0.0))
    with pytest.raises(BehindCamera):
        map_camera_space_to_image_point(pinhole, (0.0, 0.0, -1.0))
    with pytest.raises(OutOfView):
        map_camera_space_to_image_point(pinhole, (5.0, 0.0, 1.0))


@pytest.mark.parametrize("kind", ["pinhole", "distorted", "lut_only"])
def test_round_trip_16x16(kind, pinhole, distorted):
    cam = {"pinhole": pinhole, "distorted": distorted, "lut_only": distorted.with_lut_only()}[kind]
    uv = _grid16(cam)
    xy = cam.unit_plane(uv[:, 0], uv[:, 1])
    back, ok = cam.project_points(np.column_stack([xy, np.ones(len(xy))]))
    assert ok.all()
    assert np.max(np.abs(back - uv)) < 1e-4


def test_every_lut_pixel_reprojects(distorted):
    cam = distorted
    xy = cam.lut.reshape(-1, 2).astype(np.float64)
    back, ok = cam.project_points(np.column_stack([xy, np.ones(len(xy))]))
    uu, vv = np.meshgrid(np.arange(cam.width) + 0.5, np.arange(cam.height) + 0.5)
    assert ok.all()
    assert np.max(np.abs(back - np.column_stack([uu.ravel(), vv.ravel()]))) < 1e-4


def test_lut_only_matches_parametric_projection(distorted, rng):
    pts = np.column_stack([rng.uniform(-0.8, 0.8, (200, 2)), np.ones(200)])
    a, oka = distorted.project_points(pts)
    b, okb = distorted.with_lut_only().project_points(pts)
    m = oka & okb
    assert m.sum() > 150
    assert np.max(np.abs(a[m] - b[m])) < 1e-3


def test_pixel_rays_are_unit(distorted):
    n = np.linalg.norm(distorted.pixel_rays, axis=-1)
    assert np.max(np.abs(n - 1.0)) < 1e-12


def test_non_invertible_distortion_rejected():
    # corner rays of a wide image fall past the fold of r * (1 + k1 r^2)
    with pytest.raises(ValueError):
        CameraModel.from_parametric(512, 512, BrownConrady(200.0, 200.0, 256.0, 256.0, k1=-0.1))


def test_bad_lut_rejected():
    with pytest.raises(ValueError):
        CameraModel(4, 3, np.zeros((4, 3, 2)))
    lut = np.zeros((3, 4, 2))
    lut[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        CameraModel(4, 3, lut)
