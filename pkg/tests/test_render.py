from __future__ import annotations

import hashlib

import numpy as np
import pytest

from rmkit.frames import AHAT_INVALID, SIGMA_INVALID_MASK, DepthMode, decode_ahat, unwrap_ahat
from rmkit.geometry.calibration import SensorType
from rmkit.geometry.transforms import RigidTransform, look_at, rot_x
from rmkit.reconstruction import unproject_depth
from rmkit.reconstruction.pipeline import long_throw_range
from rmkit.simulator.render import AB_CONSTANT, NoiseSpec, render_depth, render_vlc
from rmkit.simulator.scene import Plane, Scene, Sphere

LT, AHAT = DepthMode.LONG_THROW, DepthMode.AHAT
I = RigidTransform.identity()


def frontal(z, albedo=0.8):
    return Scene([Plane([0, 0, z], [0, 0, -1.0], albedo)])


@pytest.fixture(scope="module")
def cams(default_rig):
    return {s: default_rig.camera(s) for s in (SensorType.DEPTH_LONG_THROW, SensorType.DEPTH_AHAT, SensorType.LEFT_FRONT)}


def test_long_throw_plane_center(cams):
    pkt = render_depth(frontal(2.0), cams[SensorType.DEPTH_LONG_THROW], I, LT)
    assert pkt.depth.depth[144, 160] == 2000
    assert not (pkt.sigma.data & SIGMA_INVALID_MASK).any()


def test_ahat_sphere_fractional(cams):
    scene = Scene([Sphere([0, 0, 1.75], 0.5)])
    pkt = render_depth(scene, cams[SensorType.DEPTH_AHAT], I, AHAT)
    assert pkt.depth.depth[256, 256] == 250
    assert pkt.sigma is None
    assert pkt.depth.depth[0, 0] == AHAT_INVALID  # corner ray misses


def test_ab_inverse_square(cams):
    cam = cams[SensorType.DEPTH_LONG_THROW]
    near = render_depth(frontal(1.0), cam, I, LT).ab.data.astype(float)
    far = render_depth(frontal(2.0), cam, I, LT).ab.data.astype(float)
    assert near[144, 160] == pytest.approx(AB_CONSTANT * 0.8, abs=1)
    # each value is rounded once, so 4*far carries up to 2 counts of error
    assert np.max(np.abs(near - 4 * far)) <= 2.5


def test_energy_strictly_decreasing(cams):
    cam = cams[SensorType.DEPTH_LONG_THROW]
    ab = [int(render_depth(frontal(z), cam, I, LT).ab.data[144, 160]) for z in np.arange(0.5, 5.01, 0.1)]
    assert all(b < a for a, b in zip(ab, ab[1:]))


def test_misses_and_far_pixels_invalid(cams):
    cam = cams[SensorType.DEPTH_LONG_THROW]
    empty = render_depth(Scene([]), cam, I, LT)
    assert not empty.depth.depth.any() and not empty.ab.data.any()
    assert np.all(empty.sigma.data & SIGMA_INVALID_MASK)
    far = render_depth(frontal(8.0), cam, I, LT)
    assert np.all(far.depth.depth == 7500)
    assert np.all(far.sigma.data & SIGMA_INVALID_MASK)


def test_total_dropout(cams):
    noise = NoiseSpec(p_invalid=1.0, seed=5)
    lt = render_depth(frontal(2.0), cams[SensorType.DEPTH_LONG_THROW], I, LT, noise)
    assert np.all(lt.sigma.data & SIGMA_INVALID_MASK)
    ah = render_depth(frontal(2.0), cams[SensorType.DEPTH_AHAT], I, AHAT, noise)
    assert np.all(ah.depth.depth == AHAT_INVALID)


def test_vlc_empty_and_falloff(cams):
    cam = cams[SensorType.LEFT_FRONT]
    assert not render_vlc(Scene([]), cam, I).image.any()
    img = render_vlc(frontal(2.0), cam, I).image.astype(int)
    assert img[240, 320] > 0
    for corner in (img[0, 0], img[0, -1], img[-1, 0], img[-1, -1]):
        assert img[240, 320] > corner


def test_vlc_golden_hash(cams):
    scene = Scene([Plane([0, -1.0, 0], [0, 1.0, 0], 0.6), Sphere([0.2, 0.0, 2.5], 0.6, 0.9)])
    T = look_at([0.0, 0.5, 0.0], [0.1, 0.0, 2.5], up=[0.0, 1.0, 0.0])
    img = render_vlc(scene, cams[SensorType.LEFT_FRONT], T).image
    assert hashlib.sha256(img.tobytes()).hexdigest() == GOLDEN_VLC


GOLDEN_VLC = "73cfb85b1fbe1c80d39211517cc57629b43e11bcde8309c07ae62fa5499f4098"


def tilted_plane():
    n = rot_x(0.35) @ np.array([0.3, 0.0, -1.0])
    n /= np.linalg.norm(n)
    return Plane([0.1, -0.1, 1.6], n), Scene([Plane([0.1, -0.1, 1.6], n)])


def test_geometric_self_consistency(default_rig, cams):
    plane, scene = tilted_plane()
    cam = cams[SensorType.DEPTH_LONG_THROW]
    W = look_at([0.05, 0.02, -0.1], [0.1, -0.1, 1.6], up=[0.0, -1.0, 0.0])
    d, valid = long_throw_range(render_depth(scene, cam, W, LT))
    assert valid.mean() > 0.9
    pts = W.apply(unproject_depth(d, valid, cam).points)
    assert np.max(np.abs((pts - plane.point) @ plane.normal)) < 1e-3

    sph = Sphere([0.0, 0.0, 1.2], 0.4)
    d, valid = long_throw_range(render_depth(Scene([sph]), cam, I, LT))
    pts = unproject_depth(d, valid, cam).points
    assert len(pts) > 1000
    assert np.max(np.abs(np.linalg.norm(pts - sph.center, axis=1) - sph.radius)) < 1e-3


def test_ahat_long_throw_cross_consistency(default_rig, cams):
    _, scene = tilted_plane()
    lt_cam, ah_cam = cams[SensorType.DEPTH_LONG_THROW], cams[SensorType.DEPTH_AHAT]
    # both modes share one depth sensor pose
    assert np.array_equal(
        default_rig[SensorType.DEPTH_AHAT].rig_from_sensor.matrix,
        default_rig[SensorType.DEPTH_LONG_THROW].rig_from_sensor.matrix,
    )
    lt_d, lt_ok = long_throw_range(render_depth(scene, lt_cam, I, LT))
    wrapped, ah_ok = decode_ahat(render_depth(scene, ah_cam, I, AHAT).depth)
    # Long Throw hint along each AHAT ray: nearest Long Throw pixel
    uv, inside = lt_cam.project_points(ah_cam.pixel_rays.reshape(-1, 3))
    ij = np.floor(uv).astype(int)
    h, w = lt_cam.height, lt_cam.width
    inside &= (ij[:, 0] >= 0) & (ij[:, 0] < w) & (ij[:, 1] >= 0) & (ij[:, 1] < h)
    ij = np.where(inside[:, None], ij, 0)
    hint = lt_d[ij[:, 1], ij[:, 0]].reshape(ah_ok.shape)
    both = ah_ok & inside.reshape(ah_ok.shape) & lt_ok[ij[:, 1], ij[:, 0]].reshape(ah_ok.shape)
    assert both.sum() > 10_000
    rec = unwrap_ahat(wrapped[both], hint[both])
    t, *_ = scene.cast(np.zeros(3), ah_cam.pixel_rays)
    assert np.max(np.abs(rec - t[both])) < 1.5e-3


def test_noise_deterministic_and_thread_independent(cams):
    cam = cams[SensorType.DEPTH_LONG_THROW]
    noise = NoiseSpec(depth_sigma=0.01, ab_sigma=0.05, p_invalid=0.1, seed=42)
    scene = Scene([Sphere([0, 0, 1.5], 0.6), Plane([0, 0, 3.0], [0, 0, -1.0])])
    a = render_depth(scene, cam, I, LT, noise, stream=3, frame=7, threads=1)
    b = render_depth(scene, cam, I, LT, noise, stream=3, frame=7, threads=4)
    for x, y in ((a.depth.depth, b.depth.depth), (a.sigma.data, b.sigma.data), (a.ab.data, b.ab.data)):
        assert np.array_equal(x, y)
    c = render_depth(scene, cam, I, LT, noise, stream=3, frame=8)
    assert not np.array_equal(a.depth.depth, c.depth.depth)
    clean = render_depth(scene, cam, I, LT)
    frac = np.mean(a.sigma.data & SIGMA_INVALID_MASK > 0) - np.mean(clean.sigma.data & SIGMA_INVALID_MASK > 0)
    assert 0.07 < frac < 0.13
    diff = (a.depth.depth.astype(float) - clean.depth.depth)[(a.sigma.data == 0)]
    assert np.std(diff) == pytest.approx(10.0, rel=0.05)  # mm


def test_noise_spec_validation():
    for bad in ({"depth_sigma": -1}, {"p_invalid": 1.5}, {"seed": -1}):
        with pytest.raises(ValueError):
            NoiseSpec(**bad)


def test_camera_shape_must_match_mode(cams):
    with pytest.raises(ValueError):
        render_depth(frontal(1.0), cams[SensorType.DEPTH_AHAT], I, LT)
    with pytest.raises(ValueError):
        render_vlc(frontal(1.0), cams[SensorType.DEPTH_AHAT], I)
