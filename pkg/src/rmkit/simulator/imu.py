"""Strapdown IMU synthesis from a trajectory.

accel = R^T (a_world - g), gyro = R^T omega_world, mag = R^T m_world, where R
is the sensor's world orientation.
"""

from __future__ import annotations

import numpy as np

from rmkit.container.format import IMU_MAX_BATCH
from rmkit.frames import ImuBatch, ImuKind
from rmkit.geometry.calibration import RigCalibration, SensorType
from rmkit.geometry.trajectory import TICKS_PER_SECOND
from rmkit.geometry.transforms import RigidTransform
from rmkit.simulator.motion import TrajectorySpec

GRAVITY = np.array([0.0, -9.81, 0.0])
MAG_FIELD = np.array([0.2, -0.8, 0.6]) / np.linalg.norm([0.2, -0.8, 0.6])
IMU_TEMPERATURE_C = 36.5

_KINDS = {
    SensorType.IMU_ACCEL: ImuKind.ACCEL,
    SensorType.IMU_GYRO: ImuKind.GYRO,
    SensorType.IMU_MAG: ImuKind.MAG,
}


def imu_samples(traj: TrajectorySpec, kind: ImuKind, rate: float, rig_from_imu: RigidTransform | None = None):
    """``(ticks, values)`` on the nominal grid of one IMU stream."""
    ticks = traj.sample_ticks(rate)
    t = ticks.astype(np.float64) / TICKS_PER_SECOND
    R, omega, accel = traj.kinematics(t, rig_from_imu)
    Rt = np.transpose(R, (0, 2, 1))
    if kind is ImuKind.ACCEL:
        world = accel - GRAVITY
    elif kind is ImuKind.GYRO:
        world = omega
    else:
        world = np.broadcast_to(MAG_FIELD, omega.shape)
    return ticks, np.einsum("nij,nj->ni", Rt, world)


def batch_samples(kind: ImuKind, ticks, values, batch: int = 32) -> list[ImuBatch]:
    if not 1 <= batch <= IMU_MAX_BATCH:
        raise ValueError(f"batch size must be in 1..{IMU_MAX_BATCH}")
    temp = None if kind is ImuKind.MAG else IMU_TEMPERATURE_C
    return [ImuBatch(kind, ticks[i : i + batch], values[i : i + batch], temp) for i in range(0, len(ticks), batch)]


def synth_imu(traj: TrajectorySpec, rates: RigCalibration | dict | None = None, batch: int = 32) -> dict:
    """Three IMU streams as lists of batches, keyed by :class:`ImuKind`.

    ``rates`` is either a rig calibration (nominal rates and extrinsics taken
    from its IMU sensors) or a ``{ImuKind: Hz}`` mapping with identity
    extrinsics. The default is 1000/1000/50 Hz.
    """
    if rates is None:
        rates = {ImuKind.ACCEL: 1000.0, ImuKind.GYRO: 1000.0, ImuKind.MAG: 50.0}
    if isinstance(rates, RigCalibration):
        plan = {k: (rates[s].nominal_fps, rates[s].rig_from_sensor) for s, k in _KINDS.items() if s in rates}
    else:
        plan = {ImuKind(k): (float(v), None) for k, v in rates.items()}
    out = {}
    for kind, (rate, ext) in plan.items():
        ticks, vals = imu_samples(traj, kind, rate, ext)
        out[kind] = batch_samples(kind, ticks, vals, batch)
    return out
