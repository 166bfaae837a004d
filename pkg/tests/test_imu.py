from __future__ import annotations

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from rmkit.frames import ImuKind
from rmkit.geometry.transforms import RigidTransform, look_at, rot_y
from rmkit.simulator.imu import GRAVITY, IMU_TEMPERATURE_C, MAG_FIELD, imu_samples, synth_imu
from rmkit.simulator.motion import Orbit, Static, TrajectorySpec, Waypoints


def static_spec(seconds=1.0):
    pose = look_at([0.3, 1.6, -0.4], [0.0, 1.0, 2.0])
    return TrajectorySpec(Static(pose), seconds), pose


def test_static_accel_is_gravity():
    spec, pose = static_spec()
    _, acc = imu_samples(spec, ImuKind.ACCEL, 1000.0)
    assert np.allclose(np.linalg.norm(acc, axis=1), 9.81, atol=1e-12)
    # specific force points up in the world
    assert np.allclose(pose.rotation @ acc[0], [0.0, 9.81, 0.0], atol=1e-12)
    _, gyro = imu_samples(spec, ImuKind.GYRO, 1000.0)
    assert not gyro.any()
    _, mag = imu_samples(spec, ImuKind.MAG, 50.0)
    assert np.allclose(mag @ pose.rotation.T, MAG_FIELD, atol=1e-12)


def test_orbit_centripetal():
    spec = TrajectorySpec(Orbit([0.0, 1.5, 0.0], 1.0, 1.0), 2.0)
    _, acc = imu_samples(spec, ImuKind.ACCEL, 1000.0)
    t = np.arange(len(acc)) / 1000.0
    R = np.stack([spec.pose_at(x).rotation for x in t])
    kinematic = np.einsum("nji,nj->ni", R, acc) + GRAVITY  # back to a_world
    assert np.allclose(np.linalg.norm(kinematic, axis=1), 1.0, atol=1e-12)
    # the rig looks at the center, so the centripetal term lies along +z
    assert np.allclose(acc[:, 2], 1.0, atol=1e-12)


def test_gyro_integration_recovers_orientation():
    spec = TrajectorySpec(Orbit([0.2, 1.0, -0.3], 0.8, 0.7, height=0.4), 10.0)
    ticks, gyro = imu_samples(spec, ImuKind.GYRO, 1000.0)
    dt = 1e-3
    q = Rotation.from_matrix(spec.pose_at(0.0).rotation)
    for w in gyro:
        q = q * Rotation.from_rotvec(w * dt)  # body-frame increment
    q = q * Rotation.from_rotvec(gyro[-1] * dt)  # step to t = 10 s
    truth = Rotation.from_matrix(spec.pose_at(len(gyro) * dt).rotation)
    err = np.degrees((truth.inv() * q).magnitude())
    assert err < 0.1


def test_sensor_offset_adds_lever_arm():
    spec = TrajectorySpec(Orbit([0.0, 0.0, 0.0], 1.0, 2.0), 1.0)
    ext = RigidTransform(rot_y(0.3), np.array([0.0, 0.0, 0.5]))  # half a meter toward the center
    _, acc = imu_samples(spec, ImuKind.ACCEL, 100.0, ext)
    # the sensor rides a 0.5 m circle: |a| = w^2 r = 2
    for k in (0, 37, 99):
        R = spec.pose_at(k / 100.0).rotation @ ext.rotation
        assert np.linalg.norm(R @ acc[k] + GRAVITY) == pytest.approx(2.0, rel=1e-9)


def test_waypoints_finite_difference():
    # constant acceleration along x: p = 0.5 a t^2
    a = 0.6
    times = np.arange(0, 2.0001, 1 / 30)
    poses = tuple(RigidTransform.from_translation([0.5 * a * t * t, 0, 0]) for t in times)
    spec = TrajectorySpec(Waypoints(times, poses), 1.5, pose_rate=30.0)
    _, acc = imu_samples(spec, ImuKind.ACCEL, 200.0)
    inner = acc[40:250]  # away from the clamped start
    assert np.allclose(inner, np.array([a, 9.81, 0.0]), atol=0.05)


def test_synth_imu_batches(default_rig):
    spec, _ = static_spec(0.5)
    out = synth_imu(spec, default_rig)
    assert sum(len(b) for b in out[ImuKind.ACCEL]) == 500
    assert sum(len(b) for b in out[ImuKind.MAG]) == 25
    assert all(len(b) <= 32 for b in out[ImuKind.GYRO])
    assert out[ImuKind.ACCEL][0].temperature == IMU_TEMPERATURE_C
    assert out[ImuKind.MAG][0].temperature is None
    ts = np.concatenate([b.timestamps for b in out[ImuKind.GYRO]])
    assert np.all(np.diff(ts.astype(np.int64)) == 10_000)
    with pytest.raises(ValueError):
        synth_imu(spec, batch=0)
